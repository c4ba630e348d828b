from dataclasses import dataclass
from typing import Dict

from shared.types import Mode

AUG_NONE = "none"
AUG_ALWAYS = "always"
AUG_DIFFICULTY = "difficulty"


# What each mode switches on: the original-image pass that feeds the bank, the augmentation
# probability source, the loss gate, and whether max-amplitude jitter is forced.
@dataclass(frozen=True)
class ModePolicy:
    da_flow: bool
    augmentation: str
    gate: bool
    strong_jitter: bool = False


POLICIES: Dict[Mode, ModePolicy] = {
    Mode.BASELINE: ModePolicy(da_flow=False, augmentation=AUG_NONE, gate=False),
    Mode.SHUFFLE_ALWAYS: ModePolicy(da_flow=True, augmentation=AUG_ALWAYS, gate=False),
    Mode.DA_ONLY: ModePolicy(da_flow=True, augmentation=AUG_DIFFICULTY, gate=False),
    Mode.NO_ONLY: ModePolicy(da_flow=True, augmentation=AUG_ALWAYS, gate=True),
    Mode.NO_ONLY_NOAUG: ModePolicy(da_flow=True, augmentation=AUG_NONE, gate=True),
    Mode.FULL: ModePolicy(da_flow=True, augmentation=AUG_DIFFICULTY, gate=True),
    Mode.STRONG_DA: ModePolicy(da_flow=True, augmentation=AUG_ALWAYS, gate=False, strong_jitter=True),
}


def policy_for(mode: Mode) -> ModePolicy:
    return POLICIES[mode]
