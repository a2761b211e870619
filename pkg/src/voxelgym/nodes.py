"""Node (voxel type) definitions and the id registry.

Ids are unsigned 16-bit. Id 0 is always air; the solid out-of-world barrier
lives at the reserved id 0xFFFF so it never collides with the sequential ids
handed out by register().
"""

from __future__ import annotations

from dataclasses import dataclass, field

AIR_ID = 0
BARRIER_ID = 0xFFFF

AIR_NAME = "builtin:air"
BARRIER_NAME = "builtin:barrier"


class RegistryError(ValueError):
    pass


class DuplicateName(RegistryError):
    pass


class InvalidName(RegistryError):
    pass


class UnknownNodeId(KeyError):
    pass


@dataclass(frozen=True)
class NodeDef:
    name: str
    solid: bool
    diggable: bool = False
    dig_ticks: int = 1
    color: tuple[int, int, int] = (255, 0, 255)
    emissive: bool = False

    def __post_init__(self):
        if not self.name or self.name.count(":") != 1:
            raise InvalidName(
                f"node name must be namespaced as 'mod:name', got {self.name!r}"
            )
        if self.diggable and self.dig_ticks < 1:
            raise ValueError("diggable nodes need dig_ticks >= 1")
        if len(self.color) != 3 or any(not (0 <= c <= 255) for c in self.color):
            raise ValueError("color must be an RGB triple of 0..255")


AIR = NodeDef(AIR_NAME, solid=False, diggable=False, color=(0, 0, 0))
BARRIER = NodeDef(BARRIER_NAME, solid=True, diggable=False, color=(40, 40, 46))


@dataclass
class NodeRegistry:
    """Name/id lookup for node definitions. Air is pre-registered at id 0."""

    _defs: list[NodeDef] = field(default_factory=lambda: [AIR])
    _by_name: dict[str, int] = field(default_factory=lambda: {AIR_NAME: AIR_ID})

    def register(self, node: NodeDef) -> int:
        if node.name == BARRIER_NAME or node.name in self._by_name:
            raise DuplicateName(f"node {node.name!r} already registered")
        nid = len(self._defs)
        if nid >= BARRIER_ID:
            raise RegistryError("registry full")
        self._defs.append(node)
        self._by_name[node.name] = nid
        return nid

    def get(self, nid: int) -> NodeDef:
        if nid == BARRIER_ID:
            return BARRIER
        if 0 <= nid < len(self._defs):
            return self._defs[nid]
        raise UnknownNodeId(nid)

    def id_of(self, name: str) -> int:
        if name == BARRIER_NAME:
            return BARRIER_ID
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownNodeId(name) from None

    def has_id(self, nid: int) -> bool:
        return nid == BARRIER_ID or 0 <= nid < len(self._defs)

    def is_solid(self, nid: int) -> bool:
        return self.get(nid).solid

    def __len__(self) -> int:
        return len(self._defs)

    def __iter__(self):
        return iter(self._defs)


def standard_registry() -> NodeRegistry:
    """Registry with the node set used by the built-in world generators."""
    reg = NodeRegistry()
    reg.register(NodeDef("default:grass", solid=True, color=(88, 158, 70)))
    reg.register(NodeDef("default:dirt", solid=True, color=(121, 85, 58)))
    reg.register(NodeDef("default:stone", solid=True, color=(125, 125, 125)))
    reg.register(
        NodeDef("default:tree", solid=True, diggable=True, dig_ticks=3, color=(97, 67, 34))
    )
    reg.register(
        NodeDef("default:leaves", solid=True, diggable=True, dig_ticks=1, color=(47, 112, 37))
    )
    reg.register(NodeDef("default:diamondblock", solid=True, color=(110, 214, 220)))
    reg.register(NodeDef("craftium:red_block", solid=True, color=(200, 30, 30)))
    reg.register(
        NodeDef("craftium:torch", solid=True, emissive=True, color=(255, 208, 96))
    )
    return reg
