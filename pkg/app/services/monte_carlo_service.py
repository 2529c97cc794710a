import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from itertools import accumulate
from typing import List, Optional, Tuple

from scipy import stats

from ..models.sampling import (
    GiantBranchProfile,
    IntervalMethod,
    LeafStatistics,
    MCEstimate,
    RngSpec,
    SamplingError,
    SamplingModel,
)
from ..models.tree import RootedTree, TreeError
from .enumeration_service import EnumerationService
from .sampler_service import SamplerService
from .tree_service import TreeService

logger = logging.getLogger(__name__)


def count_collisions(n: int, model: SamplingModel, rng: RngSpec, block: int, count: int) -> int:
    """Colisiones de códigos canónicos en `count` pares independientes del bloque dado."""
    generator = rng.generator(block)
    hits = 0
    for _ in range(count):
        first = SamplerService.sample(n, model, generator)
        second = SamplerService.sample(n, model, generator)
        if TreeService.canonical_code(first) == TreeService.canonical_code(second):
            hits += 1
    return hits


def _run_block(task: Tuple[int, SamplingModel, RngSpec, int, int]) -> Tuple[int, int]:
    n, model, rng, block, count = task
    return count, count_collisions(n, model, rng, block, count)


class MonteCarloService:
    """Servicio de estimación Monte Carlo de probabilidades de isomorfismo."""

    DEFAULT_BLOCK_SIZE = 10_000
    DEFAULT_CONFIDENCE = 0.95

    @staticmethod
    def _validate_samples(samples: int) -> None:
        if not isinstance(samples, int) or samples < 1:
            raise SamplingError(f"El número de muestras debe ser un entero positivo (recibido: {samples})")

    @staticmethod
    def _z_value(confidence: float) -> float:
        if not 0 < confidence < 1:
            raise SamplingError(f"El nivel de confianza debe estar en (0, 1) (recibido: {confidence})")
        return float(stats.norm.ppf(0.5 + confidence / 2))

    @classmethod
    def wilson_interval(cls, hits: int, samples: int, confidence: float = DEFAULT_CONFIDENCE) -> Tuple[float, float]:
        """Intervalo de Wilson para una proporción, recortado a [0, 1]."""
        cls._validate_samples(samples)
        z = cls._z_value(confidence)
        p = hits / samples
        z2 = z * z
        denominator = 1 + z2 / samples
        center = (p + z2 / (2 * samples)) / denominator
        half = z * math.sqrt(p * (1 - p) / samples + z2 / (4 * samples * samples)) / denominator
        return max(0.0, center - half), min(1.0, center + half)

    @classmethod
    def normal_interval(cls, hits: int, samples: int, confidence: float = DEFAULT_CONFIDENCE) -> Tuple[float, float]:
        """Aproximación normal p ± z·sqrt(p(1-p)/m), recortada a [0, 1]."""
        cls._validate_samples(samples)
        z = cls._z_value(confidence)
        p = hits / samples
        half = z * math.sqrt(p * (1 - p) / samples)
        return max(0.0, p - half), min(1.0, p + half)

    @staticmethod
    def block_sizes(samples: int, block_size: int) -> List[int]:
        """Bloques fijos: el bloque b siempre usa el flujo b, sin importar cuántos procesos haya."""
        if block_size < 1:
            raise SamplingError(f"El tamaño de bloque debe ser positivo (recibido: {block_size})")
        full, rest = divmod(samples, block_size)
        return [block_size] * full + ([rest] if rest else [])

    @classmethod
    def mc_iso_probability(
        cls,
        n: int,
        model: SamplingModel,
        samples: int,
        rng: RngSpec,
        block_size: int = DEFAULT_BLOCK_SIZE,
        workers: int = 1,
        method: IntervalMethod = IntervalMethod.WILSON,
        confidence: float = DEFAULT_CONFIDENCE,
    ) -> MCEstimate:
        """
        Estima la probabilidad de que dos árboles independientes de la ley dada sean isomorfos.

        Args:
            n: Tamaño de los árboles
            model: Ley de muestreo (etiquetado, GW condicionado, plano o Pólya)
            samples: Número de pares
            rng: Semilla y flujo; cada bloque deriva su propio generador
            block_size: Pares por bloque
            workers: Procesos en paralelo (1 = en el proceso actual)
            method: Wilson (por defecto) o aproximación normal
            confidence: Nivel del intervalo

        Returns:
            MCEstimate con la proporción de colisiones y su intervalo

        Raises:
            SamplingError: Si los parámetros son inválidos o el tamaño no es alcanzable
        """
        cls._validate_samples(samples)
        if workers < 1:
            raise SamplingError(f"El número de procesos debe ser positivo (recibido: {workers})")
        # falla antes de repartir trabajo si n no es alcanzable o excede el techo
        SamplerService.sample(n, model, rng.generator(0))

        tasks = [(n, model, rng, block, count) for block, count in enumerate(cls.block_sizes(samples, block_size))]
        logger.info("Monte Carlo n=%d modelo=%s: %d pares en %d bloques, %d procesos",
                    n, model.name, samples, len(tasks), workers)
        if workers == 1 or len(tasks) == 1:
            results = [_run_block(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(_run_block, tasks))

        total = sum(count for count, _ in results)
        hits = sum(h for _, h in results)
        if method is IntervalMethod.WILSON:
            low, high = cls.wilson_interval(hits, total, confidence)
        else:
            low, high = cls.normal_interval(hits, total, confidence)
        estimate = hits / total
        logger.debug("n=%d: %d/%d colisiones, IC=[%.6g, %.6g]", n, hits, total, low, high)
        return MCEstimate(
            n=n,
            model=model.name,
            estimate=estimate,
            samples=total,
            hits=hits,
            ci_low=min(low, estimate),
            ci_high=max(high, estimate),
            method=method,
            seed=rng.seed,
            confidence=confidence,
        )

    @classmethod
    def mc_isomorphic_pair_leaf_stats(
        cls,
        n: int,
        samples: int,
        rng: RngSpec,
        ceiling: Optional[int] = None,
    ) -> LeafStatistics:
        """
        Hojas de un par etiquetado condicionado a ser isomorfo: se elige la clase
        con probabilidad proporcional a (n!/|Aut|)^2 a partir de la enumeración exacta.

        Raises:
            ResourceLimitError: Si n supera el techo de enumeración
        """
        cls._validate_samples(samples)
        entries, weights = EnumerationService.isomorphic_class_law(n, ceiling)
        cumulative = list(accumulate(weights))
        generator = rng.generator()
        leaves = [entry.profile[0] for entry in entries]
        total = 0
        total_squares = 0
        for _ in range(samples):
            value = leaves[SamplerService.sample_index(generator, cumulative)]
            total += value
            total_squares += value * value
        mean = total / samples
        variance = total_squares / samples - mean * mean if samples > 1 else 0.0
        if samples > 1:
            variance *= samples / (samples - 1)
        exact = EnumerationService.exact_isomorphic_pair_moments(n, 0, ceiling)
        return LeafStatistics(
            n=n,
            samples=samples,
            mean_leaves=mean,
            variance=max(variance, 0.0),
            exact_mean=float(exact.mean),
        )

    @staticmethod
    def core_of(tree: RootedTree) -> Optional[RootedTree]:
        """Árbol que queda al quitar la rama más grande de la raíz (None si la raíz es hoja)."""
        branches = tree.branches()
        if not branches:
            return None
        largest = max(range(len(branches)), key=lambda i: branches[i].size)
        return RootedTree.from_branches(b for i, b in enumerate(branches) if i != largest)

    @classmethod
    def mc_giant_branch_profile(
        cls,
        n: int,
        model: SamplingModel,
        samples: int,
        rng: RngSpec,
        max_core: int = 4,
    ) -> GiantBranchProfile:
        """
        Frecuencias empíricas del núcleo I (lo que queda tras quitar la rama gigante).
        Los núcleos de tamaño mayor que `max_core` se agrupan bajo la clave "other".
        """
        cls._validate_samples(samples)
        if max_core < 1:
            raise TreeError(f"max_core debe ser positivo (recibido: {max_core})")
        generator = rng.generator()
        counter: Counter = Counter()
        total_size = 0
        for _ in range(samples):
            core = cls.core_of(SamplerService.sample(n, model, generator))
            if core is None:
                counter["leaf"] += 1
                continue
            total_size += core.size
            if core.size > max_core:
                counter["other"] += 1
            else:
                counter[TreeService.canonical_code(core).decode("ascii")] += 1
        frequencies = {key: count / samples for key, count in sorted(counter.items())}
        return GiantBranchProfile(
            n=n,
            model=model.name,
            samples=samples,
            mean_core_size=total_size / samples,
            core_frequencies=frequencies,
        )
