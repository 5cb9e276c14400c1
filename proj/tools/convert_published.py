#!/usr/bin/env python3
"""Convert the published expert-finding datasets to this project's format.

The upstream DBLP / Stack Exchange benchmark datasets ship with the
`expert_finding` Python package (PyPI / GitHub), which exposes them as

    A_da, A_dd, T, L_d, L_d_mask, L_a, L_a_mask, tags = \
        expert_finding.io.load_dataset(<name>)

where A_da is the document x author adjacency (scipy sparse), A_dd the
document x document adjacency, T the document texts, L_d / L_a sparse
label-assignment matrices for documents / authors, L_d_mask / L_a_mask the
indices of annotated documents (the queries) / annotated authors (the
experts), and tags the label names.

Usage:
    pip install expert_finding
    python tools/convert_published.py dblp data/dblp
    python tools/convert_published.py stats data/stats

The script only needs numpy/scipy plus the authors' package; it writes the
directory layout documented in the README (manifest.json, documents.tsv,
candidates.tsv, a_dc.mtx, a_dd.mtx, doc_labels.tsv, candidate_labels.tsv,
queries.tsv).
"""

import json
import os
import sys

import numpy as np
import scipy.sparse


def tsv_escape(text):
    return (
        str(text)
        .replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def write_mtx(path, matrix):
    coo = scipy.sparse.coo_matrix(matrix)
    data = coo.data
    integral = np.all(data == np.floor(data))
    field = "integer" if integral else "real"
    with open(path, "w") as f:
        f.write(f"%%MatrixMarket matrix coordinate {field} general\n")
        f.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for r, c, v in zip(coo.row, coo.col, data):
            value = int(v) if integral else repr(float(v))
            f.write(f"{r + 1} {c + 1} {value}\n")


def label_sets(assignment, n_entities, n_labels):
    """Accepts labels x entities or entities x labels sparse/dense matrices."""
    m = scipy.sparse.csr_matrix(assignment)
    if m.shape == (n_labels, n_entities):
        m = m.T.tocsr()
    elif m.shape != (n_entities, n_labels):
        raise SystemExit(f"unexpected label matrix shape {m.shape}")
    out = []
    for i in range(n_entities):
        row = m.getrow(i)
        out.append(sorted(int(j) for j in row.indices[row.data != 0]))
    return out


def main():
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    name, out_dir = sys.argv[1], sys.argv[2]

    import expert_finding.io as ef_io  # pip install expert_finding

    A_da, A_dd, T, L_d, L_d_mask, L_a, L_a_mask, tags = ef_io.load_dataset(name)
    A_da = scipy.sparse.csr_matrix(A_da)
    A_dd = scipy.sparse.csr_matrix(A_dd)
    n_d, n_c = A_da.shape
    if len(T) != n_d:
        raise SystemExit(f"texts ({len(T)}) and A_da rows ({n_d}) disagree")

    tags = [str(t) for t in tags]
    doc_labels = label_sets(L_d, n_d, len(tags))
    cand_labels = label_sets(L_a, n_c, len(tags))

    # Only the annotated entities carry labels; the masks are authoritative.
    d_mask = set(int(i) for i in np.asarray(L_d_mask).ravel())
    a_mask = set(int(i) for i in np.asarray(L_a_mask).ravel())
    doc_labels = [labels if i in d_mask else [] for i, labels in enumerate(doc_labels)]
    cand_labels = [labels if i in a_mask else [] for i, labels in enumerate(cand_labels)]
    queries = sorted(i for i in d_mask if doc_labels[i])

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(
            {
                "format_version": 1,
                "n_documents": n_d,
                "n_candidates": n_c,
                "n_labels": len(tags),
                "n_queries": len(queries),
                "label_names": tags,
            },
            f,
            indent=2,
        )
        f.write("\n")

    with open(os.path.join(out_dir, "documents.tsv"), "w") as f:
        for i in range(n_d):
            f.write(f"d{i}\t{tsv_escape(T[i])}\n")
    with open(os.path.join(out_dir, "candidates.tsv"), "w") as f:
        for i in range(n_c):
            f.write(f"c{i}\n")

    write_mtx(os.path.join(out_dir, "a_dc.mtx"), A_da)
    write_mtx(os.path.join(out_dir, "a_dd.mtx"), A_dd)

    with open(os.path.join(out_dir, "doc_labels.tsv"), "w") as f:
        for i, labels in enumerate(doc_labels):
            if labels:
                f.write(f"d{i}\t{','.join(tags[j] for j in labels)}\n")
    with open(os.path.join(out_dir, "candidate_labels.tsv"), "w") as f:
        for i, labels in enumerate(cand_labels):
            if labels:
                f.write(f"c{i}\t{','.join(tags[j] for j in labels)}\n")
    with open(os.path.join(out_dir, "queries.tsv"), "w") as f:
        for i in queries:
            f.write(f"d{i}\n")

    experts = sum(1 for labels in cand_labels if labels)
    print(
        f"{name}: {n_c} candidates, {n_d} documents, {len(tags)} labels, "
        f"{experts} experts, {len(queries)} queries -> {out_dir}"
    )


if __name__ == "__main__":
    main()
