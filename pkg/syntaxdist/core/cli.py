"""The ``syntaxdist`` command line.

Every subcommand reads the run configuration, works from the tag cache that
``ingest`` writes, and writes its reports plus a ``run.json`` provenance
record to ``<output_dir>/<command>/``.
"""
import functools
import logging
from enum import Enum
from importlib import metadata
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import click

from .. import __version__
from ..logging import init_logging
from . import data_manager
from .cluster import complete_linkage, minimum_spanning_tree, pam, partition_agreement, silhouette_sweep
from .config import RunConfig, load_config
from .conllu import MANIFEST_NAME, Corpus, filter_min_tokens, read_cache, read_treebanks, write_cache
from .distance import DistanceMatrix, Metric, build_distance_matrix, rank_agreement, sample_distance_matrix
from .entropy import Estimator
from .errors import ConfigError, DataError, KOutOfRange
from .geo import correlate, per_language_correlation
from .markov import run_identification_experiment
from .memory import estimate_memory, gain_curve, memory_test
from .ngrams import MAX_BLOCK_SIZE, count_blocks, estimate_distribution
from .registry import load_registry, registry_by_id

__all__ = ["ExitCodes", "cli"]

log = logging.getLogger("syntaxdist.cli")

MATRIX_JSON = "matrix.json"
MATRIX_CSV = "matrix.csv"
TOP_BLOCKS = 3


class ExitCodes(Enum):
    SUCCESS = 0
    DATA_ERROR = 1
    CONFIG_ERROR = 2


_VERSIONED = ("dcor", "networkx", "numpy", "scikit-learn", "scipy")


def _versions() -> Dict[str, str]:
    versions = {name: metadata.version(name) for name in _VERSIONED}
    versions["syntaxdist"] = __version__
    return versions


def _fail(ctx: click.Context, code: ExitCodes, error: Exception) -> None:
    log.critical("%s", error)
    ctx.exit(code.value)


def reports_errors(func):
    """Turn library errors into a logged message and the matching exit code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except ConfigError as e:
            _fail(ctx, ExitCodes.CONFIG_ERROR, e)
        except DataError as e:
            _fail(ctx, ExitCodes.DATA_ERROR, e)
        except FileNotFoundError as e:
            _fail(ctx, ExitCodes.DATA_ERROR, DataError(f"{e.filename}: no such file"))

    return wrapper


class Run:
    """The configuration of one invocation and the helpers its subcommands share."""

    def __init__(self, config: RunConfig):
        self.config = config

    @property
    def cache_dir(self) -> Path:
        return data_manager.cache_path(self.config.output_dir)

    def output(self, command: str) -> Path:
        return data_manager.command_output_path(self.config.output_dir, command)

    def corpora(self, languages: Optional[Iterable[str]] = None) -> Dict[str, Corpus]:
        return read_cache(self.cache_dir, languages)

    def registry(self):
        return load_registry(self.config.registry_path)

    def matrix(self) -> DistanceMatrix:
        path = self.config.output_dir / "distances" / MATRIX_JSON
        if not path.exists():
            raise DataError(f"No distance matrix at {path}; run the distances command first")
        return DistanceMatrix.load_json(path)

    def write_provenance(self, command: str, **parameters) -> None:
        manifest = self.cache_dir / MANIFEST_NAME
        registry = self.config.registry_path
        record = {
            "command": command,
            "config_digest": self.config.digest(),
            "seed": self.config.seed,
            "versions": _versions(),
            "input_manifest_digest": (
                data_manager.file_digest(manifest) if manifest.exists() else None
            ),
            "registry_digest": (
                data_manager.file_digest(registry) if registry is not None and registry.exists() else None
            ),
            "parameters": parameters,
        }
        data_manager.save_json(self.output(command) / "run.json", record)


pass_run = click.make_pass_decorator(Run)


def _languages(run: Run, chosen: Sequence[str]) -> List[str]:
    return list(chosen) if chosen else list(run.config.languages)


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    help="YAML run configuration.",
)
@click.option("--data-dir", type=click.Path(file_okay=False), help="Directory of .conllu treebanks.")
@click.option("--registry", type=click.Path(dir_okay=False), help="Language registry CSV.")
@click.option("--output-dir", type=click.Path(file_okay=False), help="Root of the cache and reports.")
@click.option("-r", "--block-size", type=click.IntRange(1, MAX_BLOCK_SIZE), help="Block size of distances.")
@click.option("--metric", type=click.Choice([m.value for m in Metric]))
@click.option("--estimator", type=click.Choice([e.value for e in Estimator]))
@click.option("--min-tokens", type=click.IntRange(0), help="Drop languages with fewer tokens.")
@click.option("--seed", type=click.IntRange(0), help="Master seed of every random stream.")
@click.option("--threads", type=click.IntRange(1), help="Worker threads; defaults to every core.")
@click.option(
    "--strip-final-punct/--keep-final-punct",
    default=None,
    help="Drop a sentence-final PUNCT tag while ingesting.",
)
@click.option("--debug", is_flag=True, help="Log at DEBUG level.")
@click.pass_context
@reports_errors
def cli(
    ctx,
    config_path,
    data_dir,
    registry,
    output_dir,
    block_size,
    metric,
    estimator,
    min_tokens,
    seed,
    threads,
    strip_final_punct,
    debug,
):
    """Syntactic distances between languages from part-of-speech n-grams."""
    config = load_config(Path(config_path) if config_path else None).with_overrides(
        data_dir=data_dir,
        registry_path=registry,
        output_dir=output_dir,
        block_size=block_size,
        metric=metric,
        estimator=estimator,
        seed=seed,
        threads=threads,
        **{"ingest.min_tokens": min_tokens, "ingest.strip_final_punct": strip_final_punct},
    )
    init_logging(logging.DEBUG if debug else logging.INFO, data_manager.logs_path(config.output_dir))
    ctx.obj = Run(config)


@cli.command()
@pass_run
@reports_errors
def ingest(run: Run):
    """Read the treebanks and write the tag-sequence cache."""
    config = run.config
    if config.data_dir is None:
        raise ConfigError("No data directory given; use --data-dir or set data_dir")
    corpora = read_treebanks(
        config.data_dir, strip_final_punct=config.ingest.strip_final_punct, threads=config.threads
    )
    kept = filter_min_tokens(corpora.values(), config.ingest.min_tokens)
    if not kept:
        raise DataError(f"No language has {config.ingest.min_tokens} tokens")
    dropped = sorted(set(corpora) - {c.language_id for c in kept})
    write_cache(
        {c.language_id: c for c in kept},
        run.cache_dir,
        dropped=dropped,
        min_tokens=config.ingest.min_tokens,
        strip_final_punct=config.ingest.strip_final_punct,
    )
    run.write_provenance("ingest", languages=len(kept), dropped=dropped)


@cli.command()
@click.option("-l", "--language", "languages", multiple=True, help="Language id; repeatable.")
@click.option("--max-size", type=click.IntRange(2, MAX_BLOCK_SIZE), help="Largest block size.")
@pass_run
@reports_errors
def gain(run: Run, languages, max_size):
    """Estimate predictability-gain curves."""
    config = run.config
    languages = _languages(run, languages)
    max_size = max_size or config.gain.max_size
    gain_rows, entropy_rows = [], []
    for language_id, corpus in run.corpora(languages).items():
        curve = gain_curve(corpus, config.estimator, max_size=max_size)
        gain_rows.extend([language_id, *row] for row in curve.csv_rows())
        entropy_rows.extend(
            [language_id, r, h, config.estimator.value] for r, h in enumerate(curve.entropies)
        )
    out = run.output("gain")
    data_manager.save_csv(out / "gain_curves.csv", ["language_id", "u", "gain", "estimator"], gain_rows)
    data_manager.save_csv(
        out / "block_entropies.csv", ["language_id", "r", "entropy", "estimator"], entropy_rows
    )
    run.write_provenance("gain", languages=languages, max_size=max_size)


@cli.command()
@click.option("-l", "--language", "languages", multiple=True, help="Language id; repeatable.")
@click.option("-m", "memory", type=click.IntRange(0), help="Memory hypothesis m.")
@click.option("-K", "surrogates", type=click.IntRange(1), help="Number of surrogate corpora.")
@pass_run
@reports_errors
def memtest(run: Run, languages, memory, surrogates):
    """Test the memory hypothesis against surrogate corpora."""
    config = run.config
    languages = _languages(run, languages)
    m = config.memory.m if memory is None else memory
    K = surrogates or config.memory.K
    results = []
    for corpus in run.corpora(languages).values():
        result = memory_test(
            corpus, m, K, config.seed, estimator=config.estimator, threads=config.threads
        )
        report = result.to_json()
        report["estimated_memory"] = estimate_memory(
            result.gains, result.surrogate_stds, config.memory.sigmas
        )
        results.append(report)
    data_manager.save_json(run.output("memtest") / "memtest.json", {"results": results})
    run.write_provenance("memtest", languages=languages, m=m, K=K)


@cli.command()
@click.option("-l", "--language", "languages", multiple=True, help="Language id; repeatable.")
@click.option("-u", "--order", "orders", multiple=True, type=click.IntRange(0), help="Model order; repeatable.")
@click.option("-K", "sentences", type=click.IntRange(1), help="Test sentences per language.")
@click.option("--repetitions", type=click.IntRange(1))
@pass_run
@reports_errors
def identify(run: Run, languages, orders, sentences, repetitions):
    """Identify held-out sentences with Markov models of each order."""
    config = run.config.with_overrides(
        **{
            "identify.orders": list(orders) or None,
            "identify.K": sentences,
            "identify.repetitions": repetitions,
        }
    )
    settings = config.identify
    languages = _languages(run, languages)
    orders = list(settings.orders)
    K = settings.K
    repetitions = settings.repetitions
    reports = run_identification_experiment(
        list(run.corpora(languages).values()),
        orders,
        K,
        repetitions,
        settings.length_range,
        config.seed,
        alpha=settings.alpha,
        threads=config.threads,
    )
    out = run.output("identify")
    data_manager.save_csv(
        out / "accuracy.csv",
        ["language_id", "order", "mean_accuracy", "std_accuracy"],
        [report.csv_row() for report in reports],
    )
    data_manager.save_csv(
        out / "accuracy_runs.csv",
        ["language_id", "order", "repetition", "accuracy"],
        [
            [report.language_id, report.order, rep, accuracy]
            for report in reports
            for rep, accuracy in enumerate(report.accuracies)
        ],
    )
    run.write_provenance(
        "identify", languages=languages, orders=orders, K=K, repetitions=repetitions
    )


@cli.command()
@click.option(
    "--compare-with",
    type=click.Choice([m.value for m in Metric]),
    help="Also report the rank agreement with this metric.",
)
@pass_run
@reports_errors
def distances(run: Run, compare_with):
    """Compute the distance matrix of every cached language."""
    config = run.config
    dists = {
        language_id: estimate_distribution(count_blocks(corpus, config.block_size))
        for language_id, corpus in run.corpora().items()
    }
    matrix = build_distance_matrix(dists, config.metric, threads=config.threads)
    out = run.output("distances")
    matrix.save_csv(out / MATRIX_CSV)
    matrix.save_json(out / MATRIX_JSON)
    data_manager.save_csv(
        out / "top_blocks.csv",
        ["language_id", "rank", "block", "probability"],
        [
            [language_id, rank, name, probability]
            for language_id, dist in dists.items()
            for rank, (name, probability) in enumerate(dist.most_probable(TOP_BLOCKS), 1)
        ],
    )
    parameters = {"r": config.block_size, "metric": config.metric.value, "languages": len(matrix)}
    if compare_with:
        other = build_distance_matrix(dists, compare_with, threads=config.threads)
        rho = rank_agreement(matrix, other)
        log.info("Spearman agreement of %s with %s: %.4f", config.metric.value, compare_with, rho)
        data_manager.save_json(
            out / "metric_agreement.json",
            {"metric": config.metric.value, "other": compare_with, "spearman": rho},
        )
        parameters["compare_with"] = compare_with
    run.write_provenance("distances", **parameters)


def _clip_k_range(k_range, n: int):
    k_min, k_max = k_range
    if k_max >= n:
        log.warning("Clipping the silhouette sweep to k <= %s for %s items", n - 1, n)
        k_max = n - 1
    if not 2 <= k_min <= k_max:
        raise KOutOfRange(k_min, n)
    return k_min, k_max


@cli.command()
@click.option("-k", "clusters", type=click.IntRange(2), help="Number of clusters; default best silhouette.")
@click.option(
    "--compare-matrix",
    type=click.Path(exists=True, dir_okay=False),
    help="matrix.json of another run to compare partitions with.",
)
@pass_run
@reports_errors
def cluster(run: Run, clusters, compare_matrix):
    """Cluster the distance matrix and build its minimum spanning tree."""
    config = run.config
    matrix = run.matrix()
    k_range = _clip_k_range(config.cluster.k_range, len(matrix))
    chosen_k = clusters or config.cluster.k
    if chosen_k is not None and not 2 <= chosen_k < len(matrix):
        raise KOutOfRange(chosen_k, len(matrix))
    registry = registry_by_id(run.registry())

    dendrogram = complete_linkage(matrix)
    sweep = silhouette_sweep(matrix, k_range, config.seed, threads=config.threads)
    k = chosen_k or sweep.best_k
    assignment = sweep.assignments[k] if k in sweep.assignments else pam(matrix, k, config.seed)
    tree = minimum_spanning_tree(matrix)

    out = run.output("cluster")
    data_manager.atomic_write_text(out / "dendrogram.nwk", dendrogram.to_newick())
    matrix.reordered(dendrogram.leaf_order).save_csv(out / "clustermap.csv")
    data_manager.save_csv(out / "silhouette.csv", ["k", "silhouette"], sweep.csv_rows())
    data_manager.save_csv(
        out / "pam_clusters.csv", ["language_id", "cluster", "is_medoid"], assignment.csv_rows()
    )
    data_manager.save_csv(out / "mst.csv", ["lang_a", "lang_b", "weight"], tree.csv_rows())
    data_manager.atomic_write_text(out / "mst.dot", tree.to_dot(registry, assignment))

    summary = {
        "best_k": sweep.best_k,
        "k": k,
        "silhouette": assignment.silhouette,
        "cost": assignment.cost,
        "mst_weight": tree.total_weight,
    }
    if compare_matrix:
        other = DistanceMatrix.load_json(Path(compare_matrix)).submatrix(matrix.labels)
        summary["adjusted_rand_index"] = partition_agreement(assignment, pam(other, k, config.seed))
        summary["compared_r"] = other.r
    data_manager.save_json(out / "summary.json", summary)
    run.write_provenance("cluster", k=k, k_range=list(k_range))


@cli.command()
@pass_run
@reports_errors
def geo(run: Run):
    """Correlate linguistic with geodesic distances."""
    config = run.config
    settings = config.geo
    matrix = run.matrix()
    registry = registry_by_id(run.registry())
    out = run.output("geo")

    result = correlate(
        matrix,
        registry,
        settings.exclude,
        settings.permutations,
        config.seed,
        log_distance_correlation=settings.log_distance_correlation,
        threads=config.threads,
    )
    header = ["lang_a", "lang_b", "d_ling", "d_geo_km"]
    data_manager.save_csv(out / "pairs.csv", header, result.csv_rows())

    per_language = []
    panels = {}
    for language_id in result.labels:
        row = per_language_correlation(matrix, registry, language_id, settings.exclude)
        per_language.append([language_id, row.pearson_r, row.p_value, int(row.defined)])
        if language_id in settings.panel_languages:
            data_manager.save_csv(out / f"scatter_{language_id}.csv", header, row.csv_rows())
            panels[language_id] = row.pearson_r
    data_manager.save_csv(
        out / "per_language.csv", ["language_id", "pearson_r", "p_value", "defined"], per_language
    )
    summary = result.to_json()
    summary["panels"] = panels
    data_manager.save_json(out / "summary.json", summary)
    run.write_provenance("geo", exclude=list(settings.exclude), permutations=settings.permutations)


@cli.command("group-samples")
@click.argument("group")
@click.option("-l", "--language", "languages", multiple=True, help="Use these languages instead.")
@pass_run
@reports_errors
def group_samples(run: Run, group, languages):
    """Distances between text samples of the languages in GROUP.

    GROUP is a group or family name from the registry.
    """
    config = run.config
    if not languages:
        cached = set(run.corpora())
        languages = [
            record.language_id
            for record in run.registry()
            if group in (record.group, record.family) and record.language_id in cached
        ]
    if len(languages) < 2:
        raise DataError(f"Group {group!r} has {len(languages)} cached languages; 2 are needed")
    corpora = run.corpora(languages)
    matrix = sample_distance_matrix(
        list(corpora.values()),
        config.samples.target_tokens,
        config.metric,
        config.seed,
        r=config.block_size,
        max_samples=config.samples.max_samples,
        threads=config.threads,
    )
    stem = group.replace(" ", "_").replace("/", "_")
    out = run.output("group-samples")
    matrix.save_csv(out / f"{stem}.csv")
    matrix.save_json(out / f"{stem}.json")
    run.write_provenance("group-samples", group=group, languages=list(languages))
