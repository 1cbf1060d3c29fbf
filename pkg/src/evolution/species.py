"""Speciation and offspring allocation for NEAT."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.logging import get_logger
from src.genome.genome import CppnGenome
from src.genome.innovation import InnovationRegistry
from src.genome.operators import crossover, distance, mutate
from src.models.config import NeatParams

logger = get_logger(__name__)

Scored = Tuple[CppnGenome, float]


def rank_key(item: Scored) -> Tuple[float, int]:
    """Sort key: higher fitness first, then lower genome key."""
    genome, fitness = item
    return (-fitness, genome.key)


class KeySequence:
    """Hands out genome serial ids."""

    def __init__(self, next_key: int = 0):
        self.next_key = next_key

    def __call__(self) -> int:
        key = self.next_key
        self.next_key += 1
        return key


@dataclass
class Species:
    id: int
    representative: CppnGenome
    members: List[Scored] = field(default_factory=list)
    stagnation_counter: int = 0
    best_fitness_ever: float = -math.inf

    @property
    def champion(self) -> Scored:
        return min(self.members, key=rank_key)

    @property
    def best_fitness(self) -> float:
        return self.champion[1]

    def ranked(self) -> List[Scored]:
        return sorted(self.members, key=rank_key)

    def contains(self, genome: CppnGenome) -> bool:
        return any(g is genome for g, _ in self.members)

    def summary(self) -> Dict:
        return {
            "id": self.id,
            "representative": self.representative.key,
            "members": [g.key for g, _ in self.members],
            "stagnation_counter": self.stagnation_counter,
            "best_fitness_ever": self.best_fitness_ever if math.isfinite(self.best_fitness_ever) else None,
        }


def speciate(
    population: Sequence[Scored],
    previous_species: Sequence[Species],
    params: NeatParams,
    *,
    next_species_id: int = 0,
) -> Tuple[List[Species], int]:
    """Partition ``population`` by compatibility distance.

    Each surviving species takes as new representative the unassigned genome closest to
    its old one (if within threshold). Remaining genomes join the first species whose
    representative lies within threshold, or found a new species.
    Returns the species and the next unused species id.
    """
    threshold = params.compatibility_threshold
    unassigned = list(range(len(population)))
    species: List[Species] = []

    for old in sorted(previous_species, key=lambda s: s.id):
        candidates = [
            (distance(old.representative, population[i][0], params), i) for i in unassigned
        ]
        candidates = [c for c in candidates if c[0] < threshold]
        if not candidates:
            logger.debug("species extinct", species=old.id)
            continue
        _, chosen = min(candidates)
        unassigned.remove(chosen)
        species.append(
            Species(
                id=old.id,
                representative=population[chosen][0],
                members=[population[chosen]],
                stagnation_counter=old.stagnation_counter,
                best_fitness_ever=old.best_fitness_ever,
            )
        )

    for i in unassigned:
        genome = population[i][0]
        for s in species:
            if distance(s.representative, genome, params) < threshold:
                s.members.append(population[i])
                break
        else:
            species.append(Species(id=next_species_id, representative=genome, members=[population[i]]))
            next_species_id += 1

    for s in species:
        best = s.best_fitness
        if best > s.best_fitness_ever:
            s.best_fitness_ever = best
            s.stagnation_counter = 0
        else:
            s.stagnation_counter += 1
    return species, next_species_id


def _allocate(shares: List[float], total: int, tie_ids: List[int]) -> List[int]:
    """Largest-remainder apportionment of ``total`` slots; ties go to the lower id."""
    weight = sum(shares)
    if weight <= 0.0:
        shares = [1.0] * len(shares)
        weight = float(len(shares))
    exact = [total * s / weight for s in shares]
    quotas = [int(math.floor(e)) for e in exact]
    leftover = total - sum(quotas)
    order = sorted(range(len(shares)), key=lambda i: (-(exact[i] - quotas[i]), tie_ids[i]))
    for i in order[:leftover]:
        quotas[i] += 1
    return quotas


def reproduce(
    species: Sequence[Species],
    params: NeatParams,
    rng: np.random.Generator,
    registry: InnovationRegistry,
    keys: KeySequence,
    *,
    population_size: Optional[int] = None,
) -> List[CppnGenome]:
    """Build the next generation from the current species.

    Offspring quotas follow each species' fitness-shared mean, after shifting all fitness
    values so the population minimum is 0. Species stagnant for ``max_stagnation``
    generations are dropped unless they hold the population best.
    """
    size = population_size or params.population_size
    everyone = [m for s in species for m in s.members]
    best_genome, _ = min(everyone, key=rank_key)
    best_species = next(s for s in species if s.contains(best_genome))

    survivors = [
        s for s in species if s.stagnation_counter < params.max_stagnation or s is best_species
    ]
    for s in species:
        if s not in survivors:
            logger.info("species removed for stagnation", species=s.id, generations=s.stagnation_counter)
    survivors.sort(key=lambda s: s.id)

    floor = min(f for s in survivors for _, f in s.members)
    shares = [sum(f - floor for _, f in s.members) / len(s.members) for s in survivors]
    quotas = _allocate(shares, size, [s.id for s in survivors])

    best_index = survivors.index(best_species)
    if quotas[best_index] == 0:
        donor = max(range(len(quotas)), key=lambda i: (quotas[i], survivors[i].id))
        quotas[donor] -= 1
        quotas[best_index] += 1

    offspring: List[CppnGenome] = []
    for s, quota in zip(survivors, quotas):
        if quota == 0:
            continue
        ranked = s.ranked()
        if len(ranked) > params.elitism_min_species_size or s is best_species:
            offspring.append(ranked[0][0])
            quota -= 1
        cutoff = max(1, math.ceil(params.survival_threshold * len(ranked)))
        parents = ranked[:cutoff]
        for _ in range(quota):
            first = parents[int(rng.integers(len(parents)))]
            second = parents[int(rng.integers(len(parents)))]
            fitter, other = sorted((first, second), key=rank_key)
            key = keys()
            child = crossover(fitter[0], other[0], rng, key=key)
            offspring.append(mutate(child, params, rng, registry, key=key))
    return offspring
