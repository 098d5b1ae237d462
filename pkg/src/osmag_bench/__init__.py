"""osmAG toolkit: map model, LLM-friendly transforms, hop planning,
benchmark dataset generation and rule-based grading."""

from .datasetgen import (
    DatasetRecord,
    QueryItem,
    QueryKind,
    Template,
    export_records,
    gen_hierarchical,
    gen_topological,
    import_records,
    instantiate_template,
    load_general,
    load_template,
)
from .grading import (
    EvalReport,
    GradeResult,
    evaluate,
    extract_room_sequence,
    grade_hierarchical,
    grade_item,
    grade_topological,
)
from .hierarchy import HierarchyChain, locate_owner, resolve_chain
from .llm import (
    Backend,
    ChatRequest,
    ChatResponse,
    MockCorruptorBackend,
    MockOracleBackend,
    RemoteBackend,
    TranscriptReplayBackend,
    complete_batch,
)
from .model import (
    Area,
    AreaGraph,
    AreaKind,
    OsmNode,
    Passage,
    RoomLabel,
    TagMap,
    adjacency,
    parse_room_label,
)
from .osmio import (
    load_map,
    parse_osm_xml,
    render_map_text,
    save_map,
    serialize_osm_xml,
)
from .planner import PathAnswer, PathVerdict, plan_avoiding, render_path, shortest_paths, validate_path
from .prompting import PromptLibrary, PromptSpec, TaskKind, assemble_prompt
from .transform import (
    VariantKind,
    prune_leaf_areas,
    strip_metric,
    to_variant1,
    to_variant2,
)

__version__ = "0.1.0"
