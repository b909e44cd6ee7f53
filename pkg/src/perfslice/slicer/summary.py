"""Summary edges via backward propagation of path edges.

A path edge ``(v, w)`` records that vertex ``v`` reaches formal-out ``w`` of
the same function along intraprocedural and summary edges.  When ``v`` is a
formal-in, every call site of the function gets the summary edge
actual-in -> actual-out for the matching ports.
"""
from __future__ import annotations

from collections import defaultdict

from .graph import INTRA, SUMMARY

_FOLLOW = INTRA + (SUMMARY,)


def add_summary_edges(sdg):
    """Install summary edges in place and return ``sdg``."""
    verts = sdg.vertices
    path = set()
    reaching = defaultdict(set)  # v -> formal-outs w with path edge (v, w)
    work = []

    def propagate(v, w):
        if (v, w) not in path:
            path.add((v, w))
            reaching[v].add(w)
            work.append((v, w))

    for pdg in sdg.pdgs.values():
        for w in pdg.formal_out.values():
            propagate(w, w)

    sites_by_callee = defaultdict(list)
    for site in sdg.call_sites.values():
        sites_by_callee[site.callee].append(site)

    while work:
        v, w = work.pop()
        vx = verts[v]
        if vx.kind == "formal-in":
            port_out = verts[w].port
            for site in sites_by_callee[vx.function]:
                x = site.actual_in[vx.port]
                y = site.actual_out.get(port_out)
                if y is None or not sdg.add_edge(x, y, SUMMARY):
                    continue
                for w2 in list(reaching[y]):
                    propagate(x, w2)
            continue
        for u, kind in sdg.pred[v]:
            if kind in _FOLLOW:
                propagate(u, w)
    sdg.summary_done = True
    return sdg


def summary_edges(sdg) -> set:
    return {(u, v) for (u, v, k) in sdg.edge_list((SUMMARY,))}
