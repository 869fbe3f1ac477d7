"""
CoefficientValidator - 系数张量与系数记录验证器
"""
import math
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import TERM_TYPES, CoefficientSet

G_RECORD_KEYS = ("n", "l", "m", "k", "value")
D_RECORD_KEYS = ("n", "value")


@dataclass
class CoefficientDiagnostics:
    """系数诊断结果"""
    valid: bool
    issues: List[str] = field(default_factory=list)
    nonzero_g_per_equation: Tuple[int, ...] = ()
    nonzero_d: int = 0

    @property
    def nonzero_g(self) -> int:
        return sum(self.nonzero_g_per_equation)

    def summary(self) -> str:
        if not self.valid:
            return "invalid: " + "; ".join(self.issues)
        if self.nonzero_g == 0 and self.nonzero_d == 0:
            return "valid, 0 nonzero terms"
        return f"valid, {self.nonzero_g} nonzero g entries, {self.nonzero_d} nonzero d"


class CoefficientValidator:
    """系数验证器"""

    @staticmethod
    def validate_record(
        n_components: int, record: Mapping, kind: str = "g"
    ) -> Tuple[bool, Optional[str]]:
        """
        验证单条系数记录

        Args:
            n_components: 方程个数 N
            record: {n, l, m, k, value} 或 {n, value} (1-based)
            kind: "g" 或 "d"

        Returns:
            (is_valid, error_message)
        """
        if not isinstance(record, Mapping):
            return (False, "record must be a mapping")

        keys = G_RECORD_KEYS if kind == "g" else D_RECORD_KEYS
        missing = [key for key in keys if key not in record]
        if missing:
            return (False, f"{kind} record missing {', '.join(missing)}")
        extra = sorted(set(record) - set(keys))
        if extra:
            return (False, f"{kind} record has unknown keys {', '.join(extra)}")

        limits = {"n": n_components, "m": n_components, "k": n_components, "l": TERM_TYPES}
        for key in keys[:-1]:
            index = record[key]
            if isinstance(index, bool) or not isinstance(index, (int, np.integer)):
                return (False, f"{kind} index {key}={index!r} is not an integer")
            if not 1 <= index <= limits[key]:
                return (False, f"{kind} index {key}={index} out of range 1..{limits[key]}")

        try:
            value = float(record["value"])
        except (TypeError, ValueError):
            return (False, f"{kind} value {record['value']!r} is not a number")
        if not math.isfinite(value):
            return (False, f"{kind} value {value} is not finite")

        return (True, None)

    @staticmethod
    def validate_records(
        n_components: int,
        g_records: Sequence[Mapping],
        d_records: Sequence[Mapping] = (),
    ) -> List[Tuple[int, str]]:
        """
        验证记录列表中的每个元素

        Args:
            n_components: 方程个数 N
            g_records: g 记录列表
            d_records: d 记录列表 (下标接在 g 记录之后)

        Returns:
            List of (index, error_message) for invalid records
        """
        errors = []
        if n_components < 1:
            errors.append((-1, f"n_components must be >= 1, got {n_components}"))
            return errors
        for idx, rec in enumerate(g_records):
            ok, err = CoefficientValidator.validate_record(n_components, rec, "g")
            if not ok:
                errors.append((idx, f"record {idx}: {err}"))
        offset = len(g_records)
        for idx, rec in enumerate(d_records):
            ok, err = CoefficientValidator.validate_record(n_components, rec, "d")
            if not ok:
                errors.append((offset + idx, f"record {offset + idx}: {err}"))
        return errors


def validate_coefficients(c: CoefficientSet) -> CoefficientDiagnostics:
    """
    诊断系数集合：非有限值、维度以及每个方程的非零项个数

    仅诊断，不抛出异常
    """
    issues = []
    n = c.n_components
    if c.g.shape != (n, TERM_TYPES, n, n):
        issues.append(f"g has shape {c.g.shape}, expected {(n, TERM_TYPES, n, n)}")
    if c.d.shape != (n,):
        issues.append(f"d has shape {c.d.shape}, expected {(n,)}")
    if issues:
        return CoefficientDiagnostics(valid=False, issues=issues)

    for index in np.argwhere(~np.isfinite(c.g)):
        n_, l_, m_, k_ = (int(i) + 1 for i in index)
        issues.append(f"g[n={n_}, l={l_}, m={m_}, k={k_}] is not finite")
    for index in np.argwhere(~np.isfinite(c.d)):
        issues.append(f"d[n={int(index[0]) + 1}] is not finite")

    per_equation = tuple(int(np.count_nonzero(c.g[i])) for i in range(n))
    return CoefficientDiagnostics(
        valid=not issues,
        issues=issues,
        nonzero_g_per_equation=per_equation,
        nonzero_d=int(np.count_nonzero(c.d)),
    )
