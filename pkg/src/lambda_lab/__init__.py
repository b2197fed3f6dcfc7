"""Educational untyped lambda calculus workbench."""

from .terms import (
    Abs,
    App,
    BoundVar,
    CaptureReport,
    Environment,
    FreeVar,
    RedexInfo,
    RedexKind,
    Ref,
    Rule,
    Step,
    Term,
    alpha_convert_at,
    alpha_eq,
    arity,
    beta_reduce_at,
    enumerate_redexes,
    expand_at,
    free_vars,
    is_normal_form,
    subterm_at,
    would_capture_beta,
)
from .syntax import (
    Diagnostic,
    DocumentAst,
    ParseError,
    SourceSpan,
    SyntaxConfig,
    parse_document,
    parse_term,
    print_document,
    print_term,
    rewrite_keywords,
)
from .derivation import (
    Action,
    AlphaRename,
    BetaAt,
    Derivation,
    ExpandAt,
    StepVerdict,
    Strategy,
    apply_action,
    build_environment,
    normalize,
    validate_derivation,
)
from .workspace import (
    RenderModel,
    Session,
    completions,
    edit_text,
    hover_info,
    open_session,
    outline,
    render,
    ui_action,
)

__version__ = "0.1.0"
