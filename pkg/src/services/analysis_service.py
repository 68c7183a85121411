from itertools import combinations
from typing import Callable, Dict, Iterable, List, Optional

import structlog

from src.exceptions import CrossCheckError, TooLargeError
from src.models import CheckFlag, PropertyHReport, SpaceInfoResponse
from src.ultrametric.core import (
    ZERO,
    Space,
    all_balls,
    multispectrum,
    restrict,
    spectrum,
    spectrum_at,
)
from src.ultrametric.funcspace import (
    check_initial_segments,
    check_relabelled_segments,
    embed_space,
    embedding_is_isometric,
    verify_feinberg,
)
from src.ultrametric.isometry import (
    can_move,
    check_ball_characterization,
    check_condition_A,
    check_condition_B,
    check_homogeneity_characterization,
    check_nerve_isometric_levels,
    check_property_h,
    enumerate_partial_isometries,
    extend_isometry,
    find_subspace_embedding,
    is_homogeneous,
    is_spec_homogeneous,
    is_transitive,
    isometric,
    orbits,
)
from src.ultrametric.nerve import build_nerve, degree_sequence, past, restricted_spectrum, similar, sons
from src.ultrametric.twostruct import (
    enumerate_modules,
    from_space,
    least_module,
    nerve_matches_decomposition,
    robust_modules,
    strong_modules,
)
from src.utils.rational import format_rational

logger = structlog.get_logger(__name__)


class AnalysisService:
    """Reports, verdicts and theorem sweeps over one space."""

    def info(self, space: Space) -> SpaceInfoResponse:
        nerve = build_nerve(space)
        degrees = degree_sequence(space, nerve)
        h = check_property_h(space, nerve)
        spectra = sorted(sorted(s) for s in multispectrum(space))
        return SpaceInfoResponse(
            points=len(space),
            spectrum=[format_rational(r) for r in sorted(spectrum(space))],
            multispectrum=[[format_rational(r) for r in s] for s in spectra],
            degree_sequence={format_rational(r): k for r, k in degrees.per_radius.items()},
            nerve_nodes=len(nerve),
            orbits=[list(orbit) for orbit in orbits(space)],
            property_h=PropertyHReport(h1=h.h1, h2=h.h2),
        )

    def check(
        self, space: Space, flags: Iterable[CheckFlag], brute_force: bool = False
    ) -> Dict[str, bool]:
        """Verdicts in flag order; property h reports its two halves separately."""
        verdicts: Dict[str, bool] = {}
        for flag in flags:
            flag = CheckFlag(flag)
            if flag is CheckFlag.HOMOGENEOUS:
                verdicts[flag.value] = is_homogeneous(space, brute_force=brute_force)
            elif flag is CheckFlag.SPEC_HOMOGENEOUS:
                verdicts[flag.value] = is_spec_homogeneous(space, brute_force=brute_force)
            elif flag is CheckFlag.TRANSITIVE:
                verdicts[flag.value] = is_transitive(space, brute_force=brute_force)
            elif flag is CheckFlag.CONDITION_A:
                verdicts[flag.value] = check_condition_A(space)
            elif flag is CheckFlag.CONDITION_B:
                verdicts[flag.value] = check_condition_B(space)
            elif flag is CheckFlag.PROPERTY_H:
                h = check_property_h(space)
                verdicts["h1"] = h.h1
                verdicts["h2"] = h.h2
        logger.info("Space checked", points=len(space), verdicts=verdicts, brute_force=brute_force)
        return verdicts

    def verify_theorems(self, space: Space) -> Dict[str, bool]:
        """Run every cross-check that fits the configured bounds.

        Checks that exceed a bound are left out of the result.
        """
        checks: List[tuple] = [
            ("similarity-criteria-agree", self._similarity_agrees),
            ("spectrum-splits-at-nodes", self._spectrum_splits),
            ("sons-partition-nodes", self._sons_partition),
            ("homogeneous-implies-h", self._homogeneous_implies_h),
            ("homogeneity-characterization", self._homogeneity_characterization),
            ("condition-a-implies-b", lambda s: not check_condition_A(s) or check_condition_B(s)),
            ("ball-characterization", lambda s: check_ball_characterization(s) == check_condition_A(s)),
            ("can-move-matches-orbits", self._can_move_matches_orbits),
            ("codes-match-search", self._codes_match_search),
            ("embedding-isometric", self._embedding_isometric),
            ("feinberg", verify_feinberg),
            ("homogeneous-iff-transitive", lambda s: is_homogeneous(s, brute_force=True) == is_transitive(s)),
            ("spec-homogeneous-iff-condition-a", lambda s: is_spec_homogeneous(s, brute_force=True) == check_condition_A(s)),
            (
                "nerve-levels-imply-spec-homogeneous",
                lambda s: not check_nerve_isometric_levels(s) or is_spec_homogeneous(s, brute_force=True),
            ),
            ("extension-arity-two", self._arity_two),
            ("strong-modules-are-balls", lambda s: bool(strong_modules(from_space(s), cross_check=True))),
            ("robust-modules-are-closed-balls", self._robust_are_nodes),
            ("least-module-formula", self._least_module_formula),
            ("nerve-is-decomposition-tree", nerve_matches_decomposition),
        ]
        results: Dict[str, bool] = {}
        for name, check in checks:
            outcome = self._run(name, check, space)
            if outcome is not None:
                results[name] = outcome
        logger.info("Theorem sweep finished", points=len(space), passed=sum(results.values()), total=len(results))
        return results

    def _run(self, name: str, check: Callable[[Space], bool], space: Space) -> Optional[bool]:
        try:
            return bool(check(space))
        except TooLargeError as e:
            logger.info("Check skipped", check=name, reason=e.message)
            return None
        except CrossCheckError as e:
            logger.error("Cross-check failed", check=name, reason=e.message)
            return False

    def _similarity_agrees(self, space: Space) -> bool:
        nerve = build_nerve(space)
        for first, second in combinations(all_balls(space), 2):
            similar(space, first, second, nerve)
        return True

    def _spectrum_splits(self, space: Space) -> bool:
        nerve = build_nerve(space)
        for node in nerve.nodes:
            before = past(space, node.members, nerve)
            for y in node.members:
                if spectrum_at(space, y) != restricted_spectrum(space, node, y) | before:
                    return False
        return True

    def _sons_partition(self, space: Space) -> bool:
        for node in build_nerve(space).internal_nodes:
            parts = sons(space, node)
            if len(parts) < 2 or sum(len(p) for p in parts) != len(node):
                return False
            if frozenset().union(*(p.members for p in parts)) != node.members:
                return False
            for left, right in combinations(parts, 2):
                if any(space.d(x, y) != node.diameter for x in left.members for y in right.members):
                    return False
        return True

    def _homogeneous_implies_h(self, space: Space) -> bool:
        h = check_property_h(space)
        return not is_homogeneous(space) or (h.h1 and h.h2)

    def _homogeneity_characterization(self, space: Space) -> bool:
        return is_homogeneous(space) == check_homogeneity_characterization(space)

    def _can_move_matches_orbits(self, space: Space) -> bool:
        orbit_of = {p: i for i, orbit in enumerate(orbits(space)) for p in orbit}
        return all(
            can_move(space, x, y) == (orbit_of[x] == orbit_of[y])
            for x in space.points
            for y in space.points
        )

    def _codes_match_search(self, space: Space) -> bool:
        """Nerve nodes of equal size: codes and plain backtracking agree on isometry."""
        nodes = build_nerve(space).nodes
        for first, second in combinations(nodes, 2):
            if len(first) != len(second):
                continue
            left, right = restrict(space, first.members), restrict(space, second.members)
            if (isometric(left, right) is None) != (find_subspace_embedding(left, right) is None):
                return False
        return True

    def _embedding_isometric(self, space: Space) -> bool:
        result = embed_space(space)
        return (
            embedding_is_isometric(space, result.phi)
            and embedding_is_isometric(space, result.psi)
            and check_initial_segments(space, result)
            and check_relabelled_segments(space, result)
        )

    def _arity_two(self, space: Space) -> bool:
        """A map extends iff each of its restrictions to two points does."""
        pair_extends: Dict[tuple, bool] = {}

        def pair_ok(x: str, y: str, phi: Dict[str, str]) -> bool:
            key = (x, y, phi[x], phi[y])
            if key not in pair_extends:
                pair_extends[key] = extend_isometry(space, {x: phi[x], y: phi[y]}) is not None
            return pair_extends[key]

        for phi in enumerate_partial_isometries(space):
            whole = extend_isometry(space, phi) is not None
            domain = space.in_order(phi)
            if len(domain) == 1:
                pairs_ok = whole
            else:
                pairs_ok = all(pair_ok(x, y, phi) for x, y in combinations(domain, 2))
            if whole != pairs_ok:
                return False
        return True

    def _robust_are_nodes(self, space: Space) -> bool:
        robust = robust_modules(from_space(space), cross_check=True)
        nontrivial = {node.members for node in build_nerve(space).nodes if node.diameter > ZERO}
        return robust == nontrivial

    def _least_module_formula(self, space: Space) -> bool:
        """Ball-union formula against the intersection of all modules, for sets of up to three points."""
        ts = from_space(space)
        modules = enumerate_modules(ts)
        for size in (1, 2, 3):
            for subset in combinations(space.points, size):
                members = frozenset(subset)
                brute = frozenset(space.points)
                for module in modules:
                    if members <= module:
                        brute &= module
                if least_module(ts, members) != brute:
                    return False
        return True


# Global analysis service instance
analysis_service = AnalysisService()
