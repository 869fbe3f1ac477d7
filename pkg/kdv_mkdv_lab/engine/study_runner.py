"""
ConvergenceStudyRunner - 收敛性研究调度器
"""
import asyncio
import dataclasses
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .closed_forms import SolutionFamily, sample_on_grid
from .core import CoefficientSet, FieldState, build_grid
from .errors import LabError, ParameterError
from .harness import (
    INTERIOR_MARGIN,
    ConvergenceRow,
    ConvergenceTable,
    error_report,
    run_level,
)
from .scheme import StepperConfig, integrate

logger = logging.getLogger("kdv-lab.study")

MIN_LEVELS = 3
REFERENCE_REFINEMENT = 4


class ConvergenceStudyRunner:
    """
    收敛性研究调度器

    每个网格层级在独立线程中运行 (asyncio.to_thread)，结果在锁保护下汇总。

    数据结构:
        _rows: Dict[float, ConvergenceRow]
            键: 层级参数 (h 或 tau)
            值: 该层级的误差行
    """

    def __init__(self, persistence_path: Optional[str] = None,
                 interior_margin: int = INTERIOR_MARGIN):
        self._rows: Dict[float, ConvergenceRow] = {}
        self._parameter = "h"
        self._lock = asyncio.Lock()
        self._persistence_path = Path(persistence_path) if persistence_path else None
        self._interior_margin = interior_margin

    async def spatial(
        self,
        coeffs: CoefficientSet,
        family: SolutionFamily,
        x_range: Tuple[float, float],
        hs: Sequence[float],
        t_end: float,
        cfg: StepperConfig,
    ) -> ConvergenceTable:
        """
        空间收敛性研究: 每个 h 积分一次，在 t_end 与解析解比较

        Args:
            coeffs: 系统系数
            family: 解析解族 (初值与参考解)
            x_range: 计算区域
            hs: 网格步长列表 (至少 3 个)
            t_end: 终止时间
            cfg: 时间步进配置

        Returns:
            ConvergenceTable (按 h 递减排列)

        Raises:
            ParameterError: 层级数不足或 h 重复
        """
        levels = self._ordered(hs, "h")
        async with self._lock:
            self._rows.clear()
            self._parameter = "h"

        async def level(h: float) -> None:
            row, _ = await asyncio.to_thread(
                run_level, coeffs, family, x_range, h, t_end, cfg, 0.0, self._interior_margin
            )
            await self._record(h, row)

        await asyncio.gather(*(level(h) for h in levels))
        return await self.table()

    async def temporal(
        self,
        coeffs: CoefficientSet,
        family: SolutionFamily,
        x_range: Tuple[float, float],
        h: float,
        taus: Sequence[float],
        t_end: float,
        cfg: StepperConfig,
    ) -> ConvergenceTable:
        """
        时间自收敛研究: 固定 h，误差相对于 tau_min/4 的参考解

        Returns:
            ConvergenceTable (按 tau 递减排列)
        """
        levels = self._ordered(taus, "tau")
        async with self._lock:
            self._rows.clear()
            self._parameter = "tau"

        grid = build_grid(x_range[0], x_range[1], h)
        initial = sample_on_grid(family, grid, 0.0)
        reference_tau = levels[-1] / REFERENCE_REFINEMENT

        def final_state(tau: float) -> Tuple[Optional[FieldState], int, str]:
            try:
                run_cfg = dataclasses.replace(cfg, tau=tau)
                trajectory = integrate(initial, coeffs, grid, t_end, run_cfg)
            except LabError as exc:
                logger.warning(f"temporal level tau={tau:g} failed: {exc.message}")
                return None, 0, f"failed: {exc.category}: {exc.message}"
            return trajectory.final, trajectory.diagnostics.steps, "ok"

        results = await asyncio.gather(
            *(asyncio.to_thread(final_state, tau) for tau in (*levels, reference_tau))
        )
        reference, _, reference_status = results[-1]
        if reference is None:
            raise ParameterError(f"reference run with tau={reference_tau:g} {reference_status}")

        for tau, (state, steps, status) in zip(levels, results[:-1]):
            if state is None:
                await self._record(tau, ConvergenceRow(h=h, tau=tau, steps=steps, status=status))
                continue
            report = error_report(state, reference, grid, self._interior_margin)
            row = ConvergenceRow(
                h=h,
                tau=tau,
                error_l2=report.l2,
                error_linf=report.linf,
                percentage_max=report.percentage_max,
                steps=steps,
            )
            await self._record(tau, row)
        return await self.table()

    async def table(self) -> ConvergenceTable:
        """按参数递减返回当前结果表"""
        async with self._lock:
            keys = sorted(self._rows, reverse=True)
            return ConvergenceTable(
                rows=[dataclasses.replace(self._rows[k]) for k in keys],
                parameter=self._parameter,
            )

    async def get_rows(self) -> List[ConvergenceRow]:
        """获取已完成的层级 (不排序)"""
        async with self._lock:
            return list(self._rows.values())

    def level_count(self) -> int:
        """已完成层级数 (同步，不需要锁)"""
        return len(self._rows)

    async def _record(self, key: float, row: ConvergenceRow) -> None:
        async with self._lock:
            self._rows[key] = row
            logger.info(
                f"level {self._parameter}={key:g}: l2={row.error_l2:.3e}, "
                f"linf={row.error_linf:.3e}, status={row.status}"
            )
            await self._persist()

    async def _persist(self) -> None:
        """持久化结果到 JSON 文件"""
        if self._persistence_path is None:
            return
        try:
            data = {
                "parameter": self._parameter,
                "rows": [dataclasses.asdict(self._rows[k]) for k in sorted(self._rows, reverse=True)],
            }
            with open(self._persistence_path, "w", encoding="utf-8") as f:
                json.dump(data, f, ensure_ascii=False, indent=2)
        except Exception as e:
            logger.error(f"Failed to persist study: {e}")

    @staticmethod
    def _ordered(values: Sequence[float], name: str) -> List[float]:
        levels = sorted((float(v) for v in values), reverse=True)
        if len(levels) < MIN_LEVELS:
            raise ParameterError(f"a convergence study needs at least {MIN_LEVELS} {name} levels, got {len(levels)}")
        if len(set(levels)) != len(levels):
            raise ParameterError(f"{name} levels must be distinct, got {list(values)}")
        if levels[-1] <= 0:
            raise ParameterError(f"{name} levels must be positive, got {list(values)}")
        return levels
