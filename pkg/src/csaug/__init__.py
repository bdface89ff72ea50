"""Code-switched speech synthesis by splicing aligned monolingual audio units.

The package builds an n-gram unit inventory from forced alignments, matches
code-switched text onto it with longest-match back-off, splices the sampled
cuts with Hamming crossfades and energy leveling, and ships companion tools
for zero-shot code-switched text synthesis and code-switching metrics.
"""

from .corpus import (
    AlignedToken,
    Finding,
    Recording,
    SupervisionSet,
    ValidationReport,
    extract_with_context,
    load_corpus_manifest,
    parse_ctm,
    probe_recording,
    read_wav,
    read_window,
    validate,
    write_ctm,
    write_wav,
)
from .dsp import (
    CROSSFADE_MODES,
    SILENCE_RMS,
    CrossfadeSpec,
    Waveform,
    crossfade_weights,
    hamming_rising,
    limit_peak,
    normalize_energy,
    overlap_add,
    rescale,
    rms,
    sec_to_samples,
)
from .errors import (
    AudioReadError,
    ConfigError,
    CsaugError,
    CtmParseError,
    ManifestError,
    OovError,
    RateMismatchError,
    SilentSegmentError,
    UnknownRecordingError,
    ValidationError,
)
from .generator import (
    LEVEL_MODES,
    CollageRequest,
    GeneratedUtterance,
    GenerationReport,
    ProvenanceEntry,
    SkipRecord,
    generate_collage,
    generate_utterance,
    render_from_provenance,
    subset_cs_text,
)
from .inventory import (
    CSText,
    CSUtterance,
    CutRef,
    Inventory,
    build_inventory,
    dump_inventory,
    get_consec_units,
    load_cs_text,
    load_inventory,
    sample_unit,
    write_cs_text,
)
from .metrics import (
    ARABIC,
    ENGLISH,
    MANDARIN,
    OTHER,
    ErrorRateResult,
    FilteredCmi,
    TaggedUtterance,
    classify_token,
    cmi,
    corpus_cmi,
    error_rate,
    filtered_corpus_cmi,
    load_transcripts,
    tag_tokens,
    tokenize_mixed,
)
from .textgen import (
    ParallelSentence,
    ReplacementPolicy,
    load_parallel_corpus,
    random_replace,
    replacement_stats,
    synthesize_corpus,
)

__version__ = "0.1.0"
