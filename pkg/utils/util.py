from typing import FrozenSet, Iterable, List, Optional, Sequence


def format_elapsed(elapsed_ms: float) -> str:
    if elapsed_ms < 1000:
        return f"{elapsed_ms:.1f} ms"
    seconds = elapsed_ms / 1000.0
    hours, remainder = divmod(int(seconds), 3600)
    minutes, _ = divmod(remainder, 60)

    msg_parts = []
    if hours > 0:
        msg_parts.append(f"{hours} hour{'s' if hours > 1 else ''}")
    if minutes > 0:
        msg_parts.append(f"{minutes} minute{'s' if minutes > 1 else ''}")
    msg_parts.append(f"{seconds - 60 * (60 * hours + minutes):.2f} seconds")

    return ", ".join(msg_parts)


def format_state(state: Iterable[str]) -> List[str]:
    return sorted(state)


def format_belief(belief: Iterable[FrozenSet[str]]) -> List[List[str]]:
    """Belief state as a sorted list of states, each a sorted list of true fluents"""
    return sorted(format_state(s) for s in belief)


def format_plan(plan: Optional[Sequence[str]]) -> str:
    if plan is None:
        return "-"
    return ";".join(plan) if plan else "(empty plan)"


def parse_plan(text: str) -> List[str]:
    return [step.strip() for step in text.split(";") if step.strip()]
