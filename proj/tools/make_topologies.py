"""Writes the built-in coupling maps to data/topologies/*.json."""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "topologies"

MELBOURNE = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 10), (4, 5), (5, 6), (5, 9), (6, 8), (7, 8),
             (8, 9), (9, 10), (3, 11), (10, 11), (11, 12), (2, 12), (1, 13), (12, 13), (0, 14), (13, 14)]

JOHANNESBURG = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 5), (4, 9), (5, 6), (6, 7), (7, 8), (8, 9),
                (5, 10), (7, 12), (9, 14), (10, 11), (11, 12), (12, 13), (13, 14), (10, 15),
                (14, 19), (15, 16), (16, 17), (17, 18), (18, 19)]


def rochester():
    edges = []
    for lo, hi in [(0, 4), (7, 15), (19, 27), (30, 38), (42, 50)]:
        edges += [(q, q + 1) for q in range(lo, hi)]
    edges += [(0, 5), (4, 6), (5, 9), (6, 13), (7, 16), (11, 17), (15, 18), (16, 19), (17, 23),
              (18, 27), (21, 28), (25, 29), (28, 32), (29, 36), (30, 39), (34, 40), (38, 41),
              (39, 42), (40, 46), (41, 50), (44, 51), (48, 52)]
    return edges


SYCAMORE_DIAGRAM = [
    "-----AB---",
    "----ABCD--",
    "---ABCDEF-",
    "--ABCDEFGH",
    "-ABCDEFGHI",
    "ABCDEFGHI-",
    "-CDEFGHI--",
    "--EFGHI---",
    "---GHI----",
    "----I-----",
]


def sycamore53():
    cells = [(r, c) for r, row in enumerate(SYCAMORE_DIAGRAM) for c, ch in enumerate(row) if ch != "-"]
    cells.remove((9, 4))  # the 53-qubit device lacks one of the 54 grid sites
    index = {cell: i for i, cell in enumerate(sorted(cells))}
    edges = []
    for (r, c), i in index.items():
        for nb in [(r + 1, c), (r, c + 1)]:
            if nb in index:
                edges.append((i, index[nb]))
    return len(index), edges


def write(name, n, edges, source):
    doc = {"name": name, "version": 1, "n": n, "source": source, "edges": [list(e) for e in sorted(edges)]}
    (OUT / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write("melbourne15", 15, MELBOURNE, "IBM Q Melbourne (ibmq_16_melbourne) published coupling map")
    write("johannesburg20", 20, JOHANNESBURG, "IBM Q Johannesburg published coupling map")
    write("rochester53", 53, rochester(), "IBM Q Rochester heavy-hex published coupling map")
    n, edges = sycamore53()
    write("sycamore53", n, edges, "Google Sycamore grid (Cirq 54-site layout) minus site (9,4)")


if __name__ == "__main__":
    main()
