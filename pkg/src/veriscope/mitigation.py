"""Post-hoc retrieval-augmented caption revision.

Splits a generated caption into sentence-level claims, checks each claim
against the text-bearing entries of a per-video knowledge base, and revises
ungrounded claims — either with a deterministic substitution stub or through
a remote generation endpoint (falling back to the stub when the provider is
down). The verify/revise loop repeats until every claim is grounded or the
iteration budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass

from veriscope.clients import GenerationClient, GenerationRequest, ProviderConfig
from veriscope.embedding import EmbedderSpec, embed_text
from veriscope.errors import (
    ContractViolation,
    ProviderUnavailable,
    UsageError,
    VerificationImpossible,
)
from veriscope.kb import SearchHit, SessionKnowledgeBase, search

DEFAULT_EVIDENCE_K = 5
DEFAULT_TAU_G = 0.5
DEFAULT_MAX_ITER = 3

REVISER_STUB = "stub"
REVISER_LLM = "llm"
REVISERS = (REVISER_STUB, REVISER_LLM)

_CLAIM_TERMINATORS = ".!?"

# Template for the remote reviser; tests pin the exact rendering, so the
# layout below is load-bearing. Assembled by build_revision_prompt (plain
# concatenation, so captions containing braces are safe).
REVISION_PROMPT = (
    "Revise the caption so every sentence is supported by the evidence.\n"
    "Caption: {caption}\n"
    "Unsupported sentences:\n"
    "{unsupported}\n"
    "Evidence:\n"
    "{evidence}\n"
    "Revised caption:"
)


@dataclass(frozen=True)
class Claim:
    """One sentence of a caption with its grounding verdict."""

    index: int
    text: str
    grounded: bool
    support: float
    best_evidence: SearchHit | None = None


@dataclass(frozen=True)
class VerificationResult:
    caption: str
    claims: tuple
    grounded_fraction: float
    evidence_k: int

    @property
    def ungrounded(self) -> tuple:
        return tuple(c for c in self.claims if not c.grounded)


@dataclass(frozen=True)
class RevisionOutcome:
    original: str
    revised: str
    iterations: int
    final: VerificationResult
    changed: bool
    initial: VerificationResult
    verify_passes: int
    fallback_used: bool


def split_claims(caption: str) -> list[str]:
    """Split on '.', '!' and '?'; trim pieces; drop empties.

    A caption with no terminator is a single claim.
    """
    pieces = []
    buf = []
    for ch in caption:
        if ch in _CLAIM_TERMINATORS:
            pieces.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    pieces.append("".join(buf))
    return [p for p in (piece.strip() for piece in pieces) if p]


def verify(
    caption: str,
    kb: SessionKnowledgeBase,
    spec: EmbedderSpec,
    k: int = DEFAULT_EVIDENCE_K,
    tau_g: float = DEFAULT_TAU_G,
    client=None,
) -> VerificationResult:
    """Score every claim against the KB's text-bearing entries.

    support = max cosine over the top-k text-bearing hits; a claim is
    grounded when support >= tau_g. A caption with zero claims is vacuously
    grounded (fraction 1.0).
    """
    if k < 1:
        raise UsageError("k must be >= 1")
    if not 0.0 <= tau_g <= 1.0:
        raise UsageError(f"tau_g must be in [0, 1], got {tau_g}")
    if kb.text_bearing_count == 0:
        raise VerificationImpossible(
            f"kb for {kb.video_id!r} has no text-bearing entries to ground against"
        )
    claims = []
    texts = split_claims(caption)
    for index, text in enumerate(texts):
        query = embed_text(text, spec, client=client)
        hits = search(kb, query, k, text_only=True)
        best = hits[0]
        support = best.score
        claims.append(
            Claim(
                index=index,
                text=text,
                grounded=support >= tau_g,
                support=support,
                best_evidence=best,
            )
        )
    if claims:
        fraction = sum(1 for c in claims if c.grounded) / len(claims)
    else:
        fraction = 1.0
    return VerificationResult(
        caption=caption,
        claims=tuple(claims),
        grounded_fraction=fraction,
        evidence_k=k,
    )


def _rejoin(pieces) -> str:
    pieces = list(pieces)
    if not pieces:
        return ""
    return ". ".join(pieces) + "."


def revise_stub(caption: str, vr: VerificationResult, kb: SessionKnowledgeBase) -> str:
    """Deterministic reviser: swap each ungrounded claim for its best evidence text.

    Grounded claims pass through; ungrounded claims without evidence are
    dropped; the result is re-joined with ". " plus a trailing ".".
    """
    if vr.caption != caption:
        raise UsageError("verification result was computed for a different caption")
    pieces = []
    for claim in vr.claims:
        if claim.grounded:
            pieces.append(claim.text)
        elif claim.best_evidence is not None:
            pieces.append(kb.entry_by_id(claim.best_evidence.entry_id).text)
    return _rejoin(pieces)


def build_revision_prompt(caption: str, vr: VerificationResult, kb: SessionKnowledgeBase) -> str:
    """Render the revision prompt: caption, ungrounded sentences, evidence texts."""
    unsupported = [c.text for c in vr.claims if not c.grounded]
    evidence = []
    for claim in vr.claims:
        if claim.grounded or claim.best_evidence is None:
            continue
        text = kb.entry_by_id(claim.best_evidence.entry_id).text
        if text not in evidence:
            evidence.append(text)
    return (
        "Revise the caption so every sentence is supported by the evidence.\n"
        "Caption: " + caption + "\n"
        "Unsupported sentences:\n" + "\n".join(unsupported) + "\n"
        "Evidence:\n" + "\n".join(evidence) + "\n"
        "Revised caption:"
    )


def revise_llm(
    caption: str,
    vr: VerificationResult,
    kb: SessionKnowledgeBase,
    cfg: ProviderConfig,
    max_tokens: int = 256,
):
    """Remote reviser. Returns (revised_text, fallback_used).

    Falls back to revise_stub when the provider is unavailable, violates the
    wire contract, or returns an empty completion. When every claim is
    already grounded the generator is not called.
    """
    if vr.caption != caption:
        raise UsageError("verification result was computed for a different caption")
    if not vr.ungrounded:
        return _rejoin(c.text for c in vr.claims), False
    prompt = build_revision_prompt(caption, vr, kb)
    request = GenerationRequest(prompt=prompt, max_tokens=max_tokens, temperature=0.0)
    try:
        completion = GenerationClient(cfg).generate(request).strip()
    except (ProviderUnavailable, ContractViolation):
        return revise_stub(caption, vr, kb), True
    if not completion:
        return revise_stub(caption, vr, kb), True
    return completion, False


def mitigate(
    caption: str,
    kb: SessionKnowledgeBase,
    spec: EmbedderSpec,
    k: int = DEFAULT_EVIDENCE_K,
    tau_g: float = DEFAULT_TAU_G,
    max_iter: int = DEFAULT_MAX_ITER,
    reviser: str = REVISER_STUB,
    gen_cfg: ProviderConfig | None = None,
    client=None,
) -> RevisionOutcome:
    """Verify/revise loop with at most max_iter revisions.

    Each revision is followed by a fresh verification, so the number of
    verify passes is one more than the number of revisions taken.
    """
    if max_iter < 1:
        raise UsageError("max_iter must be >= 1")
    if reviser not in REVISERS:
        raise UsageError(f"unknown reviser {reviser!r}")
    if reviser == REVISER_LLM and gen_cfg is None:
        raise UsageError("llm reviser requires a generation provider config")
    current = caption
    vr = verify(current, kb, spec, k=k, tau_g=tau_g, client=client)
    initial = vr
    passes = 1
    revisions = 0
    fallback_used = False
    while vr.grounded_fraction < 1.0 and revisions < max_iter:
        if reviser == REVISER_STUB:
            current = revise_stub(current, vr, kb)
        else:
            current, fell_back = revise_llm(current, vr, kb, gen_cfg)
            fallback_used = fallback_used or fell_back
        revisions += 1
        vr = verify(current, kb, spec, k=k, tau_g=tau_g, client=client)
        passes += 1
    return RevisionOutcome(
        original=caption,
        revised=current,
        iterations=max(1, revisions),
        final=vr,
        changed=current != caption,
        initial=initial,
        verify_passes=passes,
        fallback_used=fallback_used,
    )


def mitigation_report(pair_id: str, outcome: RevisionOutcome) -> dict:
    """Per-caption report dict (JSON-ready)."""
    return {
        "id": pair_id,
        "original": outcome.original,
        "revised": outcome.revised,
        "iterations": outcome.iterations,
        "changed": outcome.changed,
        "grounded_fraction_before": outcome.initial.grounded_fraction,
        "grounded_fraction_after": outcome.final.grounded_fraction,
        "reviser_fallback": outcome.fallback_used,
        "claims": [
            {
                "index": c.index,
                "text": c.text,
                "support": c.support,
                "grounded": c.grounded,
                "evidence_id": c.best_evidence.entry_id if c.best_evidence else None,
            }
            for c in outcome.final.claims
        ],
    }
