import networkx as nx

from core.formula import Atom, Const, Formula, children, to_text


def _label(f: Formula) -> str:
    if isinstance(f, (Atom, Const)):
        return to_text(f)
    return type(f).__name__


def formula_graph(f: Formula) -> nx.DiGraph:
    """
    Build the gate graph of a formula.

    Parameters
    ----------
    f : Formula
        Any formula, quantified or not.

    Returns
    -------
    G : nx.DiGraph
        One node per tree position (keyed by its child-index path), edges point
        from a gate to its inputs. Repeated subformulas are NOT shared, so the
        node count is the syntactic circuit size.
    """
    G = nx.DiGraph()

    # --- Iterative walk, paths as node keys ---
    stack = [((), f)]
    while stack:
        path, g = stack.pop()
        G.add_node(path, label=_label(g))
        for i, c in enumerate(children(g)):
            G.add_edge(path, path + (i,))
            stack.append((path + (i,), c))

    return G


def graph_circuit(G: nx.DiGraph) -> int:
    return G.number_of_nodes()


def graph_depth(G: nx.DiGraph) -> int:
    """Longest root-to-leaf edge count."""
    if G.number_of_nodes() <= 1:
        return 0
    return nx.dag_longest_path_length(G)
