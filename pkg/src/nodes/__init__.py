"""阶段类型导出"""

__all__ = [
    'ChebApproxNode',
    'CsvWriteNode',
    'FileWriteNode',
    'GenerateDataNode',
    'GramAssembleNode',
    'LoadDatasetNode',
    'LoadModelNode',
    'LsqSolveNode',
    'PlotScriptNode',
    'RefineModelNode',
    'ThresholdModelNode',
    'VerifyModelNode'
]
