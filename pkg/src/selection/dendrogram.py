"""Text and Graphviz renderings of a ClusterTrace."""
from .clustering import ClusterTrace


def merge_table(trace: ClusterTrace, details: bool = False) -> str:
    """
    Merge table with one row per step: the two joined clusters and the height.

    With `details`, the p-value and the groups after the step are appended.
    """
    lines = []
    header = f"{'':>6}{'[,1]':>6}{'[,2]':>6}{'[,3]':>14}"
    if details:
        header += f"{'p-value':>10}  groups"
    lines.append(header)
    for h in range(trace.steps):
        a, b = trace.merge[h]
        row = f"{f'[{h + 1},]':>6}{a:>6}{b:>6}{trace.height[h]:>14.7f}"
        if details:
            groups = ", ".join("{" + ", ".join(str(j) for j in g) + "}" for g in trace.groups[h])
            row += f"{trace.p_value[h]:>10.3f}  {groups}"
        lines.append(row)
    return "\n".join(lines)


def to_dot(trace: ClusterTrace, name: str = "dendrogram") -> str:
    """Graphviz digraph: leaves are items, inner nodes carry step and height."""
    lines = [f"digraph {name} {{", "  rankdir=BT;", "  node [shape=box];"]
    for j in trace.order:
        lines.append(f'  item{j} [label="item {j}"];')

    def node(entry: int) -> str:
        return f"item{-entry}" if entry < 0 else f"step{entry}"

    for h in range(trace.steps):
        a, b = trace.merge[h]
        lines.append(f'  step{h + 1} [shape=ellipse, label="step {h + 1}\\nLR {trace.height[h]:.3f}"];')
        lines.append(f"  {node(int(a))} -> step{h + 1};")
        lines.append(f"  {node(int(b))} -> step{h + 1};")
    lines.append("}")
    return "\n".join(lines)
