"""命令行前端：数据读写、运行配置和流水线编排"""
