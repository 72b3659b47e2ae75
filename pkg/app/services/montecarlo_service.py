"""Monte Carlo service — seeded, partitioned trial execution.

Trials are split into a fixed number of partitions. Partition k draws from
numpy.random.default_rng(SeedSequence(seed).spawn(partitions)[k]), so the
merged result depends only on (seed, partitions, trials), never on how many
worker processes ran them. Workers must be top-level functions
worker(payload, n_trials, seed_sequence, batch_size) -> dict of int counts
(or lists of ints) so they pickle for ProcessPoolExecutor.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from app.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


def partition_sizes(trials, partitions):
    """Split `trials` into `partitions` near-equal chunks (larger first)."""
    if trials < 1:
        raise InvalidArgumentError(f"trials must be >= 1, got {trials}")
    if partitions < 1:
        raise InvalidArgumentError(f"partitions must be >= 1, got {partitions}")
    partitions = min(partitions, trials)
    base, extra = divmod(trials, partitions)
    return [base + (1 if k < extra else 0) for k in range(partitions)]


def batches(n_trials, batch_size):
    """Yield batch lengths covering n_trials."""
    done = 0
    while done < n_trials:
        size = min(batch_size, n_trials - done)
        yield size
        done += size


def merge_counts(results):
    """Sum dicts of counts; list values are summed elementwise."""
    merged = {}
    for result in results:
        for key, value in result.items():
            if isinstance(value, list):
                if key not in merged:
                    merged[key] = [0] * len(value)
                merged[key] = [a + b for a, b in zip(merged[key], value)]
            else:
                merged[key] = merged.get(key, 0) + value
    return merged


def run_partitioned(worker, payload, trials, seed, partitions=8, jobs=1, batch_size=200_000):
    """Run `worker` over all partitions and merge their counts in partition order.

    Args:
        worker: Picklable callable (payload, n_trials, seed_seq, batch_size) -> counts dict.
        payload: Picklable description of the experiment.
        trials: Total trials, split as evenly as possible.
        seed: Root seed; partition k uses SeedSequence(seed).spawn(partitions)[k].
        partitions: Width of the seed tree. Changing it changes the result.
        jobs: Worker processes. Never changes the result.
        batch_size: Trials per vectorised batch inside a partition.

    Returns:
        Merged counts dict (integers summed, lists summed elementwise).
    """
    sizes = partition_sizes(trials, partitions)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = list(zip(sizes, children))
    logger.debug(
        f"Monte Carlo: {trials} trials in {len(sizes)} partitions, seed={seed}, jobs={jobs}"
    )

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as executor:
            futures = [
                executor.submit(worker, payload, n, child, batch_size)
                for n, child in tasks
            ]
            # collected in submission order, not completion order
            results = [f.result() for f in futures]
    else:
        results = [worker(payload, n, child, batch_size) for n, child in tasks]
    return merge_counts(results)


def proportion(successes, trials):
    """(rate, standard error) of a Bernoulli proportion."""
    if trials < 1:
        raise InvalidArgumentError("proportion of zero trials")
    rate = successes / trials
    return rate, math.sqrt(rate * (1.0 - rate) / trials)
