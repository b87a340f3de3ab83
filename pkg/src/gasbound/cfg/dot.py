from gasbound.cfg.build import Cfg


def _name(node) -> str:
    return f"b{node[0]:x}_{node[1]}"


def to_dot(cfg: Cfg, title: str = "cfg") -> str:
    """DOT text: one node per block labelled with its pc range."""
    lines = [f"digraph {title} {{", "  node [shape=box, fontname=monospace];"]
    for node in sorted(cfg.blocks):
        blk = cfg.blocks[node]
        label = f"{blk.start:#06x}-{blk.end:#06x}"
        if node[1]:
            label += f" ctx{node[1]}"
        attrs = f'label="{label}"'
        if node in cfg.unresolved:
            attrs += ", color=red"
        lines.append(f"  {_name(node)} [{attrs}];")
    for node in sorted(cfg.blocks):
        blk = cfg.blocks[node]
        for s in blk.successors:
            lines.append(f'  {_name(node)} -> {_name(s)} [label="{blk.edge_kinds[s]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
