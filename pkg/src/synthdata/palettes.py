from typing import Dict, Tuple

from pydantic import BaseModel, field_validator

from shared.types import NUM_CLASSES
from synthdata.shapes import RGB

# The six colors of one RGB-permutation orbit, in hexagon order: each color shares
# one channel value with both neighbours. The source uses four of them; the two it
# leaves out are what a channel shuffle reaches from every class equally often.
ORBIT: Tuple[RGB, ...] = (
    (0.9, 0.5, 0.1),
    (0.5, 0.9, 0.1),
    (0.1, 0.9, 0.5),
    (0.1, 0.5, 0.9),
    (0.5, 0.1, 0.9),
    (0.9, 0.1, 0.5),
)

# square, disk, triangle, cross. Neighbouring orbit colors go to shapes of similar area
# so the mean color alone still separates the source classes.
SOURCE_FOREGROUNDS: Tuple[RGB, ...] = (ORBIT[0], ORBIT[3], ORBIT[4], ORBIT[1])

# Colors no source class wears. Each class gets the one whose orbit neighbours belong
# to other classes.
NOVEL_FOREGROUNDS: Tuple[RGB, ...] = (ORBIT[2], ORBIT[5], ORBIT[2], ORBIT[5])

BACKGROUND: RGB = (0.1, 0.1, 0.1)

SOURCE_DOMAIN = 0

# Target 1 dresses every class in its novel color; target 2 + c keeps class c in its
# source color and dresses the rest.
MAX_TARGETS = 1 + NUM_CLASSES


class DomainSpec(BaseModel):
    domain_id: int
    name: str
    palette: Dict[int, Tuple[RGB, RGB]]

    @field_validator("palette")
    @classmethod
    def covers_every_class(cls, v: Dict[int, Tuple[RGB, RGB]]):
        if sorted(v) != list(range(NUM_CLASSES)):
            raise ValueError(f"palette must assign colors to classes 0..{NUM_CLASSES - 1}")
        for fg, bg in v.values():
            if not all(0.0 <= c <= 1.0 for c in (*fg, *bg)):
                raise ValueError("palette colors must lie in [0, 1]")
        return v

    def colors(self, cls: int) -> Tuple[RGB, RGB]:
        return self.palette[cls]


def source_palette() -> DomainSpec:
    return DomainSpec(
        domain_id=SOURCE_DOMAIN,
        name="source",
        palette={c: (SOURCE_FOREGROUNDS[c], BACKGROUND) for c in range(NUM_CLASSES)},
    )


def kept_class(k: int) -> int | None:
    """The class target k leaves in its source color, or None for the fully recolored target."""
    if not 1 <= k <= MAX_TARGETS:
        raise ValueError(f"target index must lie in [1, {MAX_TARGETS}], got {k}")
    return None if k == 1 else k - 2


def target_palette(k: int) -> DomainSpec:
    keep = kept_class(k)
    return DomainSpec(
        domain_id=k,
        name=f"target{k}",
        palette={
            c: (SOURCE_FOREGROUNDS[c] if c == keep else NOVEL_FOREGROUNDS[c], BACKGROUND) for c in range(NUM_CLASSES)
        },
    )


def reassigned_palette(mapping: Tuple[int, ...], domain_id: int = 1) -> DomainSpec:
    """Class c wears the source color of class mapping[c]."""
    if sorted(mapping) != list(range(NUM_CLASSES)):
        raise ValueError(f"mapping must permute 0..{NUM_CLASSES - 1}, got {mapping}")
    return DomainSpec(
        domain_id=domain_id,
        name=domain_name(domain_id),
        palette={c: (SOURCE_FOREGROUNDS[mapping[c]], BACKGROUND) for c in range(NUM_CLASSES)},
    )


def domain_name(domain_id: int) -> str:
    return "source" if domain_id == SOURCE_DOMAIN else f"target{domain_id}"
