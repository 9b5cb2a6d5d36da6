import re
from typing import Dict, Any, List, Optional
from .models import StageResult

# ${stage.field} / ${stage.list[0]} / ${config.max_degree}
_REFERENCE = re.compile(r'\$\{([a-zA-Z0-9_]+(?:\.[a-zA-Z0-9_]+|\[\d+\])*)\}')
_PART = re.compile(r'([a-zA-Z0-9_]+)|\[(\d+)\]')


class ParamsProcessor:
    """参数处理器"""

    @staticmethod
    def split_reference(expr: str) -> List[Any]:
        """把 'a.b[2].c' 拆成 ['a', 'b', 2, 'c']"""
        return [name if name else int(index) for name, index in _PART.findall(expr)]

    @staticmethod
    def resolve(
        expr: str,
        results: Dict[str, StageResult],
        context: Optional[Dict[str, Any]] = None
    ) -> Any:
        """解析单个引用表达式，返回原始对象（不转字符串）"""
        parts = ParamsProcessor.split_reference(expr)
        head, fields = parts[0], parts[1:]

        # 先检查是否是上下文变量
        if context and head in context:
            current = context[head]
        # 再检查是否是阶段引用
        elif head in results:
            if not results[head].data:
                raise ValueError(f"阶段 {head} 没有返回数据")
            current = results[head].data
        else:
            raise ValueError(f"引用了未执行的阶段或未定义的上下文变量: {head}")

        for field in fields:
            if isinstance(field, int):
                if not isinstance(current, (list, tuple)):
                    raise ValueError(f"不能对 {type(current)} 使用下标")
                if field >= len(current):
                    raise ValueError(f"下标 {field} 超出长度 {len(current)}")
                current = current[field]
            elif isinstance(current, dict):
                if field not in current:
                    raise ValueError(f"{head} 的结果中不存在字段: {field}")
                current = current[field]
            elif hasattr(current, field):
                current = getattr(current, field)
            else:
                raise ValueError(f"无法从 {type(current)} 访问字段: {field}")
        return current

    @staticmethod
    def process_params(
        params: Dict[str, Any],
        results: Dict[str, StageResult],
        context: Optional[Dict[str, Any]] = None
    ) -> Dict[str, Any]:
        """处理阶段参数，支持嵌套参数和表达式替换

        Args:
            params: 原始参数
            results: 已有的执行结果
            context: 上下文变量（运行配置等）

        Returns:
            Dict[str, Any]: 处理后的参数
        """
        def process_value(value: Any) -> Any:
            """递归处理参数值"""
            if isinstance(value, str):
                # 完整引用保留对象本身，例如数组和模型
                match = _REFERENCE.fullmatch(value)
                if match:
                    return ParamsProcessor.resolve(match.group(1), results, context)
                # 嵌在字符串里的引用替换为文本
                return _REFERENCE.sub(
                    lambda m: str(ParamsProcessor.resolve(m.group(1), results, context)), value
                )
            elif isinstance(value, dict):
                return {k: process_value(v) for k, v in value.items()}
            elif isinstance(value, list):
                return [process_value(item) for item in value]
            return value
        return {key: process_value(value) for key, value in (params or {}).items()}
