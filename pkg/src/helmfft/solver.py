"""Three-stage direct solve with sequential, shared-worker and partitioned modes.

The pipeline is always: build and fold the right-hand side, forward 2D sine
transform of every z-plane, solve the decoupled tridiagonal systems along z,
inverse transform. The modes differ only in how the work is distributed:

- Sequential: one thread does everything.
- SharedWorkers(w): w threads split planes (or line batches) and mode pencils
  of shared arrays; no data movement is needed between stages.
- Partitioned(p, t): p parts each own a z-slab and a y-slab of private
  storage; between the transform and tridiagonal stages every part sends each
  other part one block of extents n_x x kpy x kpz through a Transport, then
  the inverse redistribution runs after the solves. Each part may use t
  threads internally. Blocks are sent in ascending destination-part order.

Stages are separated by barriers; within a stage workers touch disjoint data,
so repeated runs are bitwise reproducible and every mode yields the same
solution to roundoff.
"""

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .assembly import Field3D, BoundaryData, build_rhs, fold_dirichlet
from .errors import InvalidPartitionError
from .grid import CoefficientProfile, Grid3D
from .spectral import (make_plan, transform_lines_x, transform_lines_y,
                       transform_stack)
from .stencil import SchemeKind
from .transport import (STAGE_FORWARD, STAGE_INVERSE, InProcessMesh)
from . import tridiag

PER_PLANE = "per-plane"
PER_LINE_BATCH = "per-line-batch"


@dataclass(frozen=True)
class Sequential:
    pass


@dataclass(frozen=True)
class SharedWorkers:
    workers: int


@dataclass(frozen=True)
class Partitioned:
    parts: int
    workers_per_part: int = 1


Mode = Union[Sequential, SharedWorkers, Partitioned]


@dataclass(frozen=True)
class SolverConfig:
    mode: Mode = field(default_factory=Sequential)
    transform_parallelism: str = PER_PLANE
    # factory(n_parts) -> list of transports, one per part; None = in-process
    transport_factory: Optional[Callable] = None


@dataclass(frozen=True)
class PhaseTimings:
    setup_s: float = 0.0
    transform_s: float = 0.0
    exchange_s: float = 0.0
    tridiag_s: float = 0.0
    total_s: float = 0.0


def plan_partition(extent: int, parts: int):
    """Split range(extent) into `parts` contiguous chunks, sizes differing by <= 1.

    Returns 0-based half-open (start, stop) tuples; the larger chunks go to
    the lower part indices.
    """
    if parts < 1 or parts > extent:
        raise InvalidPartitionError(f"cannot split {extent} indices into {parts} parts")
    base, rem = divmod(extent, parts)
    ranges = []
    start = 0
    for p in range(parts):
        size = base + (1 if p < rem else 0)
        ranges.append((start, start + size))
        start += size
    return ranges


@dataclass(frozen=True)
class PartitionPlan:
    """Per-part z-ranges (transform stages) and y-ranges (tridiagonal stage)."""

    z_ranges: tuple
    y_ranges: tuple

    @property
    def n_parts(self):
        return len(self.z_ranges)


def make_partition_plan(grid: Grid3D, parts: int) -> PartitionPlan:
    return PartitionPlan(
        z_ranges=tuple(plan_partition(grid.n_z, parts)),
        y_ranges=tuple(plan_partition(grid.n_y, parts)),
    )


@dataclass(frozen=True)
class ExchangePlan:
    """Block geometry of the z-slab <-> y-slab redistribution."""

    n_x: int
    n_y: int
    n_z: int
    partition: PartitionPlan

    @property
    def n_parts(self):
        return self.partition.n_parts

    def block_extents(self, sender: int, receiver: int):
        """(ext_x, ext_y, ext_z) of the forward block sender -> receiver."""
        z0, z1 = self.partition.z_ranges[sender]
        y0, y1 = self.partition.y_ranges[receiver]
        return (self.n_x, y1 - y0, z1 - z0)

    def total_volume(self):
        return sum(
            np.prod(self.block_extents(p, q))
            for p in range(self.n_parts) for q in range(self.n_parts)
        )


def make_exchange_plan(grid: Grid3D, parts: int) -> ExchangePlan:
    return ExchangePlan(n_x=grid.n_x, n_y=grid.n_y, n_z=grid.n_z,
                        partition=make_partition_plan(grid, parts))


def exchange_forward(plan: ExchangePlan, transport, part: int,
                     z_slab: np.ndarray) -> np.ndarray:
    """Redistribute this part's z-slab into its y-slab.

    z_slab has shape (kpz, n_y, n_x); the result has shape (n_z, kpy, n_x)
    and preserves every value's (i, j, l) identity. Blocks go out in
    ascending destination-part order.
    """
    z_ranges, y_ranges = plan.partition.z_ranges, plan.partition.y_ranges
    z0, z1 = z_ranges[part]
    y0, y1 = y_ranges[part]
    if z_slab.shape != (z1 - z0, plan.n_y, plan.n_x):
        raise ValueError(f"z-slab shape {z_slab.shape} != "
                         f"{(z1 - z0, plan.n_y, plan.n_x)}")
    y_slab = np.empty((plan.n_z, y1 - y0, plan.n_x), dtype=complex)
    for q in range(plan.n_parts):
        qy0, qy1 = y_ranges[q]
        if q == part:
            y_slab[z0:z1] = z_slab[:, y0:y1, :]
        else:
            transport.send(q, STAGE_FORWARD,
                           np.ascontiguousarray(z_slab[:, qy0:qy1, :]))
    for q in range(plan.n_parts):
        if q == part:
            continue
        qz0, qz1 = z_ranges[q]
        block = transport.receive(q, STAGE_FORWARD, plan.block_extents(q, part))
        y_slab[qz0:qz1] = block
    return y_slab


def exchange_inverse(plan: ExchangePlan, transport, part: int,
                     y_slab: np.ndarray) -> np.ndarray:
    """Inverse of exchange_forward: y-slab back to the z-slab layout."""
    z_ranges, y_ranges = plan.partition.z_ranges, plan.partition.y_ranges
    z0, z1 = z_ranges[part]
    y0, y1 = y_ranges[part]
    if y_slab.shape != (plan.n_z, y1 - y0, plan.n_x):
        raise ValueError(f"y-slab shape {y_slab.shape} != "
                         f"{(plan.n_z, y1 - y0, plan.n_x)}")
    z_slab = np.empty((z1 - z0, plan.n_y, plan.n_x), dtype=complex)
    for q in range(plan.n_parts):
        qz0, qz1 = z_ranges[q]
        if q == part:
            z_slab[:, y0:y1, :] = y_slab[z0:z1]
        else:
            transport.send(q, STAGE_INVERSE,
                           np.ascontiguousarray(y_slab[qz0:qz1]))
    for q in range(plan.n_parts):
        if q == part:
            continue
        qy0, qy1 = y_ranges[q]
        ext_x, ext_y, ext_z = plan.block_extents(part, q)
        block = transport.receive(q, STAGE_INVERSE, (ext_x, qy1 - qy0, ext_z))
        z_slab[:, qy0:qy1, :] = block
    return z_slab


def _validate_config(config: SolverConfig, grid: Grid3D):
    if config.transform_parallelism not in (PER_PLANE, PER_LINE_BATCH):
        raise ValueError(f"unknown transform parallelism {config.transform_parallelism!r}")
    mode = config.mode
    if isinstance(mode, Sequential):
        return
    if isinstance(mode, SharedWorkers):
        if mode.workers < 1:
            raise ValueError(f"worker count must be >= 1, got {mode.workers}")
        if config.transform_parallelism == PER_PLANE and mode.workers > grid.n_z:
            raise InvalidPartitionError(
                f"{mode.workers} workers need {mode.workers} planes, grid has {grid.n_z}")
        if config.transform_parallelism == PER_LINE_BATCH and (
                mode.workers > grid.n_x or mode.workers > grid.n_y):
            raise InvalidPartitionError(
                f"{mode.workers} workers exceed line counts ({grid.n_x}, {grid.n_y})")
        return
    if isinstance(mode, Partitioned):
        if mode.parts < 1 or mode.workers_per_part < 1:
            raise ValueError("part and worker counts must be >= 1")
        if mode.parts > grid.n_z or mode.parts > grid.n_y:
            raise InvalidPartitionError(
                f"{mode.parts} parts exceed slab extents ({grid.n_z}, {grid.n_y})")
        min_kpz = grid.n_z // mode.parts
        if config.transform_parallelism == PER_PLANE and mode.workers_per_part > min_kpz:
            raise InvalidPartitionError(
                f"{mode.workers_per_part} workers per part need as many local planes; "
                f"smallest slab has {min_kpz}")
        if config.transform_parallelism == PER_LINE_BATCH and (
                mode.workers_per_part > grid.n_x or mode.workers_per_part > grid.n_y):
            raise InvalidPartitionError(
                f"{mode.workers_per_part} workers per part exceed line counts "
                f"({grid.n_x}, {grid.n_y})")
        return
    raise ValueError(f"unknown mode {mode!r}")


def _run_chunks(executor, fn, ranges):
    """Run fn over ranges on the executor and wait (the stage barrier)."""
    futures = [executor.submit(fn, r) for r in ranges]
    for f in futures:
        f.result()


def _forward_or_inverse_transform(plan, values, parallelism, workers, executor):
    """One full 2D transform pass of a stack (forward = inverse for this kernel)."""
    n_z, n_y, n_x = values.shape
    if executor is None or workers <= 1:
        transform_stack(plan, values)
        return
    if parallelism == PER_PLANE:
        ranges = plan_partition(n_z, min(workers, n_z))
        _run_chunks(executor, lambda r: transform_stack(plan, values, r), ranges)
    else:
        ranges = plan_partition(n_y, min(workers, n_y))
        _run_chunks(executor, lambda r: transform_lines_x(values, r), ranges)
        ranges = plan_partition(n_x, min(workers, n_x))
        _run_chunks(executor, lambda r: transform_lines_y(values, r), ranges)


def _tridiag_stage(values, scheme, profile, grid, workers, executor, m_offset=0):
    n_y = values.shape[1]
    if executor is None or workers <= 1:
        tridiag.solve_slab(values, scheme, profile, grid, m_offset)
        return
    ranges = plan_partition(n_y, min(workers, n_y))
    _run_chunks(
        executor,
        lambda r: tridiag.solve_slab(values[:, r[0]:r[1], :], scheme, profile,
                                     grid, m_offset + r[0]),
        ranges,
    )


def solve_discrete(rhs: Field3D, boundary: BoundaryData, scheme: SchemeKind,
                   profile: CoefficientProfile, grid: Grid3D,
                   config: SolverConfig = SolverConfig()):
    """Solve the 27-point system for a prebuilt right-hand side.

    Returns (solution Field3D, PhaseTimings). rhs is the unfolded right-hand
    side; boundary values are folded here as part of setup.
    """
    t_start = time.perf_counter()
    _validate_config(config, grid)
    plan = make_plan(grid.n_x, grid.n_y)
    work = fold_dirichlet(rhs, boundary, scheme, profile, grid)
    values = work.values
    setup_s = time.perf_counter() - t_start

    mode = config.mode
    if isinstance(mode, (Sequential, SharedWorkers)):
        workers = 1 if isinstance(mode, Sequential) else mode.workers
        executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
        try:
            t0 = time.perf_counter()
            _forward_or_inverse_transform(plan, values, config.transform_parallelism,
                                          workers, executor)
            t1 = time.perf_counter()
            _tridiag_stage(values, scheme, profile, grid, workers, executor)
            t2 = time.perf_counter()
            _forward_or_inverse_transform(plan, values, config.transform_parallelism,
                                          workers, executor)
            t3 = time.perf_counter()
        finally:
            if executor is not None:
                executor.shutdown(wait=True)
        timings = PhaseTimings(
            setup_s=setup_s,
            transform_s=(t1 - t0) + (t3 - t2),
            exchange_s=0.0,
            tridiag_s=t2 - t1,
            total_s=time.perf_counter() - t_start,
        )
        return Field3D(values), timings

    # partitioned mode
    parts, t_workers = mode.parts, mode.workers_per_part
    ex_plan = make_exchange_plan(grid, parts)
    part_plan = ex_plan.partition
    if config.transport_factory is not None:
        transports = config.transport_factory(parts)
    else:
        mesh = InProcessMesh(parts)
        transports = [mesh.endpoint(p) for p in range(parts)]

    out = np.empty_like(values)
    barrier = threading.Barrier(parts)
    part_times = [None] * parts
    errors = []

    def run_part(part):
        try:
            transform_s = exchange_s = tridiag_s = 0.0
            z0, z1 = part_plan.z_ranges[part]
            y0, _y1 = part_plan.y_ranges[part]
            local = values[z0:z1].copy()
            executor = (ThreadPoolExecutor(max_workers=t_workers)
                        if t_workers > 1 else None)
            try:
                barrier.wait()
                t0 = time.perf_counter()
                _forward_or_inverse_transform(plan, local, config.transform_parallelism,
                                              t_workers, executor)
                transform_s += time.perf_counter() - t0

                barrier.wait()
                t0 = time.perf_counter()
                y_slab = exchange_forward(ex_plan, transports[part], part, local)
                exchange_s += time.perf_counter() - t0

                barrier.wait()
                t0 = time.perf_counter()
                _tridiag_stage(y_slab, scheme, profile, grid, t_workers, executor,
                               m_offset=y0)
                tridiag_s += time.perf_counter() - t0

                barrier.wait()
                t0 = time.perf_counter()
                local = exchange_inverse(ex_plan, transports[part], part, y_slab)
                exchange_s += time.perf_counter() - t0

                barrier.wait()
                t0 = time.perf_counter()
                _forward_or_inverse_transform(plan, local, config.transform_parallelism,
                                              t_workers, executor)
                transform_s += time.perf_counter() - t0
                out[z0:z1] = local
            finally:
                if executor is not None:
                    executor.shutdown(wait=True)
            part_times[part] = (transform_s, exchange_s, tridiag_s)
        except BaseException as exc:  # propagate to the caller, release peers
            errors.append(exc)
            barrier.abort()

    threads = [threading.Thread(target=run_part, args=(p,)) for p in range(parts)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for tr in transports:
        tr.close()
    if errors:
        for exc in errors:  # prefer the root cause over broken-barrier fallout
            if not isinstance(exc, threading.BrokenBarrierError):
                raise exc
        raise errors[0]

    timings = PhaseTimings(
        setup_s=setup_s,
        transform_s=max(pt[0] for pt in part_times),
        exchange_s=max(pt[1] for pt in part_times),
        tridiag_s=max(pt[2] for pt in part_times),
        total_s=time.perf_counter() - t_start,
    )
    return Field3D(out), timings


def solve_direct(problem, config: SolverConfig = SolverConfig()) -> Field3D:
    """Build the scheme right-hand side for a problem and solve it."""
    solution, _ = solve_with_timings(problem, config)
    return solution


def solve_with_timings(problem, config: SolverConfig = SolverConfig()):
    """Like solve_direct but also returns the phase timing breakdown."""
    t0 = time.perf_counter()
    rhs = build_rhs(problem.scheme, problem.source, problem.profile, problem.grid)
    rhs_s = time.perf_counter() - t0
    solution, timings = solve_discrete(rhs, problem.boundary, problem.scheme,
                                       problem.profile, problem.grid, config)
    timings = PhaseTimings(
        setup_s=timings.setup_s + rhs_s,
        transform_s=timings.transform_s,
        exchange_s=timings.exchange_s,
        tridiag_s=timings.tridiag_s,
        total_s=timings.total_s + rhs_s,
    )
    return solution, timings
