"""Boosting constructions for regular, calibrated, and multicalibrated simulators.

All three constructors share one engine: measure the worst violation the
distinguisher family can still witness, shift the simulator a step of size
epsilon against it, and charge the step to the squared-error potential
E[(g - h)^2].  The potential starts at most 1/4, never goes below 0, and
every update is guaranteed to spend at least (3/4) * epsilon^2 of it, which
bounds the number of updates by ceil(1/(3 epsilon^2)) + 1 before the run
even starts.

Constructors never self-certify: they assert their own postconditions by
re-running the audits in this module from scratch on the finished simulator,
and the test suite audits them again through an independent path.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .domain import BoundedFn, Distribution, potential, round_to_grid
from .errors import InternalContractError, ValidationError
from .families import BestResponse, Family, best_response

TRACE_TOL = 1e-10


def updates_bound(epsilon: float) -> int:
    """Hard cap on boost updates implied by the potential argument."""
    return math.ceil(1.0 / (3.0 * epsilon * epsilon)) + 1


@dataclass(frozen=True)
class BoostParams:
    """Shared knobs for the boosting constructors.

    round_grid is the arithmetic grid the simulator is rounded to after each
    update; it defaults to exactly epsilon**10, the coarsest grid that keeps
    rounding losses negligible against the per-update potential drop.
    Rounding direction is round-half-to-even throughout.
    """

    epsilon: float
    round_grid: float | None = None
    max_iters: int | None = None
    gamma: float | None = None

    def __post_init__(self):
        if not (0.0 < self.epsilon < 0.5):
            raise ValidationError("epsilon must lie in (0, 0.5)")
        grid = self.round_grid
        if grid is None:
            object.__setattr__(self, "round_grid", self.epsilon ** 10)
        else:
            if not (0.0 < grid <= self.epsilon ** 10):
                raise ValidationError("round_grid must lie in (0, epsilon^10]")
        if self.max_iters is None:
            object.__setattr__(self, "max_iters", updates_bound(self.epsilon))
        elif self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.gamma is not None and not (0.0 < self.gamma <= self.epsilon):
            raise ValidationError("gamma must lie in (0, epsilon]")

    def require_gamma(self) -> float:
        if self.gamma is None:
            raise ValidationError("this construction needs params.gamma")
        return self.gamma


def _digest(h: BoundedFn) -> str:
    return hashlib.sha256(h.values.tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class TraceRecord:
    """One trace event: a correlation update, a recalibration, or a level shift."""

    step: int
    kind: str  # "update" | "recalibrate" | "level-update"
    phi_before: float
    phi_after: float
    digest: str
    correlation: float | None = None
    sign: int | None = None
    member_index: int | None = None
    descriptor: str | None = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "step": self.step,
            "kind": self.kind,
            "phi_before": self.phi_before,
            "phi_after": self.phi_after,
            "digest": self.digest,
        }
        if self.correlation is not None:
            out["correlation"] = self.correlation
        if self.sign is not None:
            out["sign"] = self.sign
        if self.member_index is not None:
            out["member_index"] = self.member_index
        if self.descriptor is not None:
            out["descriptor"] = self.descriptor
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass(frozen=True)
class BoostTrace:
    """Full per-iteration record of a boosting run."""

    epsilon: float
    records: tuple[TraceRecord, ...]
    final: BoundedFn
    termination: str

    @property
    def update_count(self) -> int:
        return sum(1 for r in self.records if r.kind in ("update", "level-update"))

    def validate(self, min_update_drop: float) -> None:
        """Check the potential bookkeeping the constructors promise."""
        for r in self.records:
            if not (-TRACE_TOL <= r.phi_before <= 1 + TRACE_TOL) or not (
                -TRACE_TOL <= r.phi_after <= 1 + TRACE_TOL
            ):
                raise InternalContractError(f"potential left [0, 1] at step {r.step}")
            if r.kind in ("update", "level-update"):
                drop = r.phi_before - r.phi_after
                if drop < min_update_drop - TRACE_TOL:
                    raise InternalContractError(
                        f"update at step {r.step} dropped potential by {drop!r}, "
                        f"below the guaranteed {min_update_drop!r}"
                    )

    def to_jsonl(self) -> str:
        lines = [json.dumps(r.to_json(), sort_keys=True) for r in self.records]
        lines.append(
            json.dumps(
                {
                    "final_digest": _digest(self.final),
                    "termination": self.termination,
                    "updates": self.update_count,
                },
                sort_keys=True,
            )
        )
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------


def multiaccuracy_error(
    family: Family, g: BoundedFn, h: BoundedFn, dist: Distribution
) -> tuple[float, BestResponse]:
    """Worst |E[f (g - h)]| over the family, with the witnessing member."""
    br = best_response(family, g, h, dist)
    return br.correlation, br


def _level_sets(h: BoundedFn, dist: Distribution):
    values, inverse = np.unique(h.values, return_inverse=True)
    masses = np.zeros(values.size)
    np.add.at(masses, inverse, dist.weights)
    return values, inverse, masses


def calibration_error(g: BoundedFn, h: BoundedFn, dist: Distribution) -> float:
    """Exact sup over reweightings w: [0,1] -> [0,1] of |E[w(h) (g - h)]|.

    Because h takes finitely many values the supremum is attained at a 0/1
    reweighting, so it equals max(sum of positive level-set residual masses,
    sum of negative ones).
    """
    values, inverse, _ = _level_sets(h, dist)
    residual = dist.weights * (g.values - h.values)
    level_mass = np.zeros(values.size)
    np.add.at(level_mass, inverse, residual)
    pos = float(level_mass[level_mass > 0].sum())
    neg = float(-level_mass[level_mass < 0].sum())
    return max(pos, neg)


@dataclass(frozen=True)
class LevelAudit:
    value: float
    mass: float
    max_error: float
    witness_index: int

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "mass": self.mass,
            "max_error": self.max_error,
            "witness_index": self.witness_index,
        }


@dataclass(frozen=True)
class MulticalibrationAudit:
    epsilon: float
    bad_mass: float
    passes: bool
    levels: tuple[LevelAudit, ...]

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "bad_mass": self.bad_mass,
            "passes": self.passes,
            "levels": [l.to_json() for l in self.levels],
        }


def multicalibration_check(
    g: BoundedFn, h: BoundedFn, dist: Distribution, family: Family, epsilon: float
) -> tuple[bool, MulticalibrationAudit]:
    """Per-level regularity audit: the mass of level sets of h on which some
    family member keeps conditional correlation above epsilon must not
    exceed epsilon."""
    if epsilon < 0:
        raise ValidationError("epsilon must be nonnegative")
    values, inverse, masses = _level_sets(h, dist)
    residual = dist.weights * (g.values - h.values)
    # (m, L): per member, per level, signed residual correlation mass
    level_matrix = np.zeros((len(family), values.size))
    contrib = family.matrix * residual[None, :]
    np.add.at(level_matrix.T, inverse, contrib.T)
    levels = []
    bad_mass = 0.0
    for j in range(values.size):
        if masses[j] <= 0.0:
            continue
        errs = np.abs(level_matrix[:, j]) / masses[j]
        w = int(np.argmax(errs))
        worst = float(errs[w])
        levels.append(
            LevelAudit(value=float(values[j]), mass=float(masses[j]), max_error=worst, witness_index=w)
        )
        if worst > epsilon:
            bad_mass += float(masses[j])
    passes = bad_mass <= epsilon
    return passes, MulticalibrationAudit(
        epsilon=epsilon, bad_mass=bad_mass, passes=passes, levels=tuple(levels)
    )


@dataclass(frozen=True)
class AuditReport:
    """From-scratch measurements of every guarantee a constructor can claim."""

    multiaccuracy_error: float
    multiaccuracy_witness: int
    calibration_error: float
    multicalibration: MulticalibrationAudit

    def to_json(self) -> dict:
        return {
            "multiaccuracy_error": self.multiaccuracy_error,
            "multiaccuracy_witness": self.multiaccuracy_witness,
            "calibration_error": self.calibration_error,
            "multicalibration": self.multicalibration.to_json(),
        }


def audit(
    g: BoundedFn,
    h: BoundedFn,
    dist: Distribution,
    family: Family,
    epsilon: float,
) -> AuditReport:
    ma, witness = multiaccuracy_error(family, g, h, dist)
    cal = calibration_error(g, h, dist)
    _, mc = multicalibration_check(g, h, dist, family, epsilon)
    return AuditReport(
        multiaccuracy_error=ma,
        multiaccuracy_witness=witness.index,
        calibration_error=cal,
        multicalibration=mc,
    )


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def multiaccuracy_boost(
    g: BoundedFn, dist: Distribution, family: Family, params: BoostParams
) -> tuple[BoundedFn, BoostTrace]:
    """Boost a regular simulator: start at the constant 1/2 and, while some
    signed member correlates with the residual above epsilon, step the
    simulator by epsilon toward it, clip to [0, 1], and round to the
    arithmetic grid.

    Guarantees asserted on every run: at most ceil(1/(3 eps^2)) + 1 updates,
    each dropping the potential by at least (3/4) eps^2, and the one-step
    potential law phi' <= phi - 2 eps corr + eps^2 + 2 grid.
    """
    eps = params.epsilon
    grid = params.round_grid
    h = BoundedFn.constant(g.size, 0.5)
    records: list[TraceRecord] = []
    phi = potential(g, h, dist)
    step = 0
    while True:
        br = best_response(family, g, h, dist)
        if br.correlation <= eps + TRACE_TOL:
            trace = BoostTrace(
                epsilon=eps,
                records=tuple(records),
                final=h,
                termination="regular",
            )
            trace.validate(0.75 * eps * eps)
            return h, trace
        if step >= params.max_iters:
            raise InternalContractError(
                f"multiaccuracy boost exceeded {params.max_iters} updates; "
                "the potential argument rules this out for a valid family"
            )
        shifted = np.clip(h.values + eps * br.sign * br.distinguisher.values.values, 0.0, 1.0)
        h_new = BoundedFn(round_to_grid(shifted, grid))
        phi_new = potential(g, h_new, dist)
        if phi_new > phi - 2 * eps * br.correlation + eps * eps + 2 * grid + TRACE_TOL:
            raise InternalContractError(
                f"potential law violated at step {step}: {phi!r} -> {phi_new!r} "
                f"with correlation {br.correlation!r}"
            )
        records.append(
            TraceRecord(
                step=step,
                kind="update",
                phi_before=phi,
                phi_after=phi_new,
                digest=_digest(h_new),
                correlation=br.correlation,
                sign=br.sign,
                member_index=br.index,
                descriptor=br.distinguisher.descriptor,
            )
        )
        h, phi = h_new, phi_new
        step += 1


def recalibrate(
    g: BoundedFn, h: BoundedFn, dist: Distribution, gamma: float
) -> BoundedFn:
    """Replace h on each of its level sets by the conditional mean of g there,
    rounded to the width-gamma value grid.

    Because h is constant on each exact-value level set, the first step is a
    genuine L2 projection and never raises the potential; the rounding moves
    each level by at most gamma/2, so the potential rises by at most
    gamma^2/4 over the projection and the result's calibration error is at
    most gamma/2.  Rounding to the grid also merges levels that fall in the
    same width-gamma cell, capping the number of distinct values at the grid
    size.  Levels carrying no probability mass are left untouched; they
    cannot affect any audit.
    """
    if gamma <= 0:
        raise ValidationError("gamma must be positive")
    values, inverse, masses = _level_sets(h, dist)
    new_values = h.values.copy()
    for j in range(values.size):
        mass = float(masses[j])
        if mass <= 0.0:
            continue
        sel = inverse == j
        mean = float(np.dot(dist.weights[sel], g.values[sel])) / mass
        new_values[sel] = round_to_grid(np.array([mean]), gamma)[0]
    return BoundedFn(new_values)


def calibrated_multiaccuracy(
    g: BoundedFn, dist: Distribution, family: Family, params: BoostParams
) -> tuple[BoundedFn, BoostTrace]:
    """Alternate correlation updates with recalibration until the simulator is
    both regular at epsilon and calibrated at gamma.

    Recalibration is a conditional-expectation projection, so it never raises
    the potential beyond the gamma^2/4 rounding slack and the update budget
    of the plain boost survives unchanged.
    """
    eps = params.epsilon
    gamma = params.require_gamma()
    grid = params.round_grid
    h = BoundedFn.constant(g.size, 0.5)
    records: list[TraceRecord] = []
    phi = potential(g, h, dist)
    step = 0
    updates = 0
    while True:
        h_cal = recalibrate(g, h, dist, gamma)
        phi_cal = potential(g, h_cal, dist)
        if phi_cal > phi + gamma * gamma / 4.0 + TRACE_TOL:
            raise InternalContractError(
                f"recalibration raised potential by {phi_cal - phi!r} at step {step}"
            )
        records.append(
            TraceRecord(
                step=step,
                kind="recalibrate",
                phi_before=phi,
                phi_after=phi_cal,
                digest=_digest(h_cal),
                detail={"gamma": gamma},
            )
        )
        h, phi = h_cal, phi_cal
        step += 1
        br = best_response(family, g, h, dist)
        if br.correlation <= eps + TRACE_TOL:
            trace = BoostTrace(
                epsilon=eps,
                records=tuple(records),
                final=h,
                termination="regular-and-calibrated",
            )
            trace.validate(0.75 * eps * eps)
            return h, trace
        if updates >= params.max_iters:
            raise InternalContractError(
                f"calibrated boost exceeded {params.max_iters} updates"
            )
        shifted = np.clip(h.values + eps * br.sign * br.distinguisher.values.values, 0.0, 1.0)
        h_new = BoundedFn(round_to_grid(shifted, grid))
        phi_new = potential(g, h_new, dist)
        if phi_new > phi - 2 * eps * br.correlation + eps * eps + 2 * grid + TRACE_TOL:
            raise InternalContractError(f"potential law violated at step {step}")
        records.append(
            TraceRecord(
                step=step,
                kind="update",
                phi_before=phi,
                phi_after=phi_new,
                digest=_digest(h_new),
                correlation=br.correlation,
                sign=br.sign,
                member_index=br.index,
                descriptor=br.distinguisher.descriptor,
            )
        )
        h, phi = h_new, phi_new
        step += 1
        updates += 1


def multicalibrate(
    g: BoundedFn,
    dist: Distribution,
    family: Family,
    epsilon: float,
    max_iters: int | None = None,
) -> tuple[BoundedFn, BoostTrace]:
    """Drive the simulator until, outside a set of mass epsilon, no level set
    of its values leaves a family member with conditional correlation above
    epsilon.

    The simulator lives on the epsilon grid throughout.  Each round picks
    the level/member pair with the largest mass-weighted violation among
    levels whose mass clears the floor epsilon / (number of grid values);
    levels below the floor can total at most epsilon mass, which is exactly
    the exempt mass the guarantee allows.  The shift applied to the level is
    the best thresholding of the chosen member: shifting by the raw member
    values and re-rounding to the grid could round away to nothing, while a
    maximizing threshold provably drops the potential by at least
    epsilon^2 times the level mass.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValidationError("epsilon must lie in (0, 1)")
    n_grid = math.ceil(1.0 / epsilon) + 1
    floor = epsilon / n_grid
    if max_iters is None:
        max_iters = math.ceil(4.0 * n_grid / epsilon ** 3)
    h = BoundedFn(round_to_grid(np.full(g.size, 0.5), epsilon))
    records: list[TraceRecord] = []
    phi = potential(g, h, dist)
    step = 0
    while True:
        choice = _worst_weighted_violation(g, h, dist, family, epsilon, floor)
        if choice is None:
            trace = BoostTrace(
                epsilon=epsilon,
                records=tuple(records),
                final=h,
                termination="violating-mass-below-floor",
            )
            trace.validate(epsilon * epsilon * floor)
            return h, trace
        if step >= max_iters:
            raise InternalContractError(
                f"multicalibration exceeded {max_iters} iterations"
            )
        level_value, sel, member_idx, sign, weighted = choice
        f_vals = family[member_idx].values.values
        threshold, target = _best_threshold_shift(
            g, h, dist, sel, f_vals, sign, epsilon, level_value
        )
        new_values = h.values.copy()
        new_values[target] = np.clip(level_value + epsilon * sign, 0.0, 1.0)
        h_new = BoundedFn(new_values)
        phi_new = potential(g, h_new, dist)
        mass = float(dist.weights[sel].sum())
        if phi - phi_new < epsilon * epsilon * mass - TRACE_TOL:
            raise InternalContractError(
                f"level update at step {step} dropped potential by {phi - phi_new!r}, "
                f"below epsilon^2 * level mass = {epsilon * epsilon * mass!r}"
            )
        records.append(
            TraceRecord(
                step=step,
                kind="level-update",
                phi_before=phi,
                phi_after=phi_new,
                digest=_digest(h_new),
                correlation=weighted / mass,
                sign=sign,
                member_index=member_idx,
                descriptor=family[member_idx].descriptor,
                detail={
                    "level": level_value,
                    "level_mass": mass,
                    "threshold": threshold,
                },
            )
        )
        h, phi = h_new, phi_new
        step += 1


def _worst_weighted_violation(g, h, dist, family, epsilon, floor):
    """Pick the (level, member, sign) with the largest |E[1_level f (g-h)]|
    among levels with mass >= floor and conditional correlation > epsilon."""
    values, inverse, masses = _level_sets(h, dist)
    residual = dist.weights * (g.values - h.values)
    best = None
    for j in range(values.size):
        mass = float(masses[j])
        if mass < floor or mass <= 0.0:
            continue
        sel = inverse == j
        weighted = family.matrix[:, sel] @ residual[sel]
        for m in range(len(family)):
            w = float(weighted[m])
            if abs(w) / mass <= epsilon:
                continue
            cand = (abs(w), float(values[j]), sel, m, +1 if w > 0 else -1)
            if best is None or cand[0] > best[0]:
                best = cand
    if best is None:
        return None
    weighted_abs, level_value, sel, member_idx, sign = best
    return level_value, sel, member_idx, sign, weighted_abs


def _best_threshold_shift(g, h, dist, sel, f_vals, sign, epsilon, level_value):
    """Choose the threshold t maximizing the guaranteed potential drop of
    shifting {x in level : f(x) >= t} by sign * epsilon.

    Since f = integral over t of 1[f >= t], some threshold keeps at least the
    full weighted correlation, so the maximizing drop is at least
    epsilon^2 * level mass whenever the conditional correlation exceeds
    epsilon.
    """
    residual_sel = dist.weights[sel] * (g.values[sel] - level_value)
    f_sel = f_vals[sel]
    w_sel = dist.weights[sel]
    candidates = np.unique(f_sel[f_sel > 0.0])[::-1]
    best_drop = -np.inf
    best_t = None
    for t in candidates:
        above = f_sel >= t
        gain = 2.0 * epsilon * sign * float(residual_sel[above].sum())
        cost = epsilon * epsilon * float(w_sel[above].sum())
        drop = gain - cost
        if drop > best_drop:
            best_drop = drop
            best_t = float(t)
    if best_t is None:
        raise InternalContractError("qualifying violation had no positive member values")
    target = np.zeros(g.size, dtype=bool)
    idx = np.where(sel)[0]
    target[idx[f_vals[sel] >= best_t]] = True
    return best_t, target
