"""Deterministic data-side toolkit.

BPE tokenizer training with byte fallback, multilingual vocabulary
extension, weighted dataset-mixture sampling, manifest-verified ingestion,
and robot action-chunk utilities, all behind a reproducible CLI.
"""

__version__ = "0.1.0"

from .actions import (  # noqa: E402
    ActionChunk,
    LatencyModel,
    NormStats,
    Trajectory,
    chunk_trajectory,
    decode_latency,
    denormalize,
    fit_norm_stats,
    jitter,
    normalize,
    reassemble,
)
from .bpe import (  # noqa: E402
    DecodeResult,
    MergeRule,
    Tokenizer,
    Vocabulary,
    build_vocabulary,
    load_tokenizer,
    save_tokenizer,
    train_bpe,
)
from .efficiency import (  # noqa: E402
    EfficiencyComparison,
    EfficiencyReport,
    compare_efficiency,
    encoding_efficiency,
)
from .errors import ParseError, ValidationError  # noqa: E402
from .extend import (  # noqa: E402
    ExtensionPlan,
    FilterRules,
    MergeReport,
    merge_vocabularies,
    plan_embedding_extension,
)
from .manifest import (  # noqa: E402
    DatasetManifest,
    ShardInfo,
    build_manifest,
    iter_records,
    load_manifest,
    save_manifest,
    verify_manifest,
)
from .mixture import (  # noqa: E402
    MixtureSampler,
    MixtureSpec,
    SamplerState,
    builtin_oxe_mixture,
    load_mixture_spec,
    save_mixture_spec,
)
from .schedule import epoch_plan, mixture_stream, read_index_stream, write_index_stream  # noqa: E402
from .staging import (  # noqa: E402
    LLAVA_CAPTIONING_STAGE,
    LLAVA_INSTRUCT_STAGE,
    StagedPlan,
    StageSpec,
    StageWarning,
    assemble_staged_mixture,
)
