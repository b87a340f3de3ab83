"""Iterative dominator computation (Cooper, Harvey and Kennedy)."""


def reverse_postorder(succ: dict, entry) -> list:
    seen = {entry}
    order = []
    stack = [(entry, iter(succ.get(entry, ())))]
    while stack:
        node, it = stack[-1]
        for s in it:
            if s not in seen:
                seen.add(s)
                stack.append((s, iter(succ.get(s, ()))))
                break
        else:
            stack.pop()
            order.append(node)
    order.reverse()
    return order


def immediate_dominators(succ: dict, entry) -> dict:
    """Map each node reachable from ``entry`` to its immediate dominator.

    The entry maps to None.
    """
    if entry is None:
        return {}
    rpo = reverse_postorder(succ, entry)
    index = {n: i for i, n in enumerate(rpo)}
    preds = {n: [] for n in rpo}
    for n in rpo:
        for s in succ.get(n, ()):
            if s in preds:
                preds[s].append(n)

    idom = {entry: entry}

    def intersect(a, b):
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in rpo[1:]:
            done = [p for p in preds[n] if p in idom]
            new = done[0]
            for p in done[1:]:
                new = intersect(p, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True
    idom[entry] = None
    return idom
