"""报告序列化: JSON (orjson) 与 CSV"""

import csv
import math
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import orjson


def _default(obj: Any) -> Any:
    """orjson 无法直接处理的类型"""
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray) and np.iscomplexobj(obj):
        return np.stack([obj.real, obj.imag], axis=-1).tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"无法序列化类型 {type(obj).__name__}")


def encode_float(value: float) -> Union[float, str]:
    """JSON 不支持 inf/nan，用字符串表示"""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return value


def decode_float(value: Union[float, int, str]) -> float:
    return float(value)


def sanitize(obj: Any) -> Any:
    """递归替换非有限浮点数"""
    if isinstance(obj, float):
        return encode_float(obj)
    if isinstance(obj, dict):
        return {k: sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    return obj


def dumps(obj: Any, indent: bool = True) -> str:
    option = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS
    if indent:
        option |= orjson.OPT_INDENT_2
    return orjson.dumps(sanitize(obj), default=_default, option=option).decode("utf-8")


def loads(text: Union[str, bytes]) -> Any:
    return orjson.loads(text)


def read_json(path: Union[str, Path]) -> Any:
    return orjson.loads(Path(path).read_bytes())


def write_json(obj: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def complex_pairs(values: np.ndarray) -> List[Any]:
    """复数数组 -> 嵌套 [re, im] 列表"""
    arr = np.asarray(values, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def from_pairs(data: Any) -> np.ndarray:
    """嵌套 [re, im] 列表 (或实数) -> 复数数组"""
    arr = np.asarray(data, dtype=float)
    if arr.ndim >= 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def rows_to_csv(
    rows: Iterable[Mapping[str, Any]],
    columns: Sequence[str],
    path: Optional[Union[str, Path]] = None,
) -> str:
    """把字典行写成 CSV 文本，给出 path 时同时落盘"""
    import io

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(row.get(k)) for k in columns})
    text = buffer.getvalue()
    if path is not None:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    return text


def _csv_cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    return value
