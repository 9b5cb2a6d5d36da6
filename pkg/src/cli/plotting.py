"""外部绘图脚本生成

只生成 gnuplot 脚本，不在进程内绘图。脚本与 CSV 放在同一目录，按相对文件名引用。
"""

import logging
import os
from pathlib import Path
from typing import Iterable, Sequence, Union

from jinja2 import Environment, FileSystemLoader, StrictUndefined

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates")

_environment = Environment(
    loader=FileSystemLoader(TEMPLATE_DIR),
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def render_plot_script(
    csv_path: Union[str, Path],
    columns: Sequence[str],
    title: str,
    script_name: str = "plot.gp",
    point_columns: Iterable[str] = (),
) -> str:
    """渲染脚本文本

    Args:
        csv_path: CSV 文件，首列为时间
        columns: CSV 表头（含首列）
        title: 图标题
        script_name: 脚本文件名，写在注释里
        point_columns: 以散点绘制的列（原始数据），其余画线
    """
    if len(columns) < 2:
        raise ValueError(f"至少需要时间列和一个数据列: {list(columns)}")
    points = set(point_columns)
    template = _environment.get_template("plot.gp.j2")
    return template.render(
        title=title,
        csv_name=Path(csv_path).name,
        script_name=script_name,
        xlabel=columns[0],
        columns=[
            {"index": i, "name": name, "points": name in points}
            for i, name in enumerate(columns[1:], start=2)
        ],
    )


def write_plot_script(
    script_path: Union[str, Path],
    csv_path: Union[str, Path],
    columns: Sequence[str],
    title: str,
    point_columns: Iterable[str] = (),
) -> Path:
    script_path = Path(script_path)
    script_path.parent.mkdir(parents=True, exist_ok=True)
    text = render_plot_script(csv_path, columns, title, script_path.name, point_columns)
    script_path.write_text(text, encoding="utf-8")
    logger.info(f"写出绘图脚本 {script_path}")
    return script_path
