"""Small on-disk datasets with learnable structure for end-to-end tests."""

import numpy as np


def write_nc_dataset(root, seed=0, n_targets=80, epochs=20):
    """Two-class N-Triples graph where the class decides which relation a target uses.

    Writes ``g.nt``, ``train.tsv``, ``test.tsv`` and ``nc.cfg`` under ``root``
    and returns the config path. A ``label`` relation leaks the class and is
    excluded by the config.
    """
    rng = np.random.default_rng(seed)
    lines, rows = [], []
    for i in range(n_targets):
        c = i % 2
        for _ in range(3):
            lines.append(f"<http://x/e{i}> <http://x/p{c}> <http://x/h{int(rng.integers(0, 10))}> .")
        lines.append(f"<http://x/e{i}> <http://x/q> <http://x/e{int(rng.integers(0, n_targets))}> .")
        lines.append(f'<http://x/e{i}> <http://x/label> "{c}" .')
        rows.append((f"http://x/e{i}", f"c{c}"))
    # a far-away chain that 2-hop pruning removes
    for j in range(5):
        lines.append(f"<http://x/h0> <http://x/far> <http://x/f{j}> .")
        lines.append(f"<http://x/f{j}> <http://x/far> <http://x/g{j}> .")
    root.mkdir(parents=True, exist_ok=True)
    (root / "g.nt").write_text("\n".join(lines) + "\n")
    split = int(0.75 * n_targets)
    for name, part in (("train", rows[:split]), ("test", rows[split:])):
        (root / f"{name}.tsv").write_text("id\tlab\n" + "".join(f"{e}\t{c}\n" for e, c in part))
    cfg = root / "nc.cfg"
    cfg.write_text(
        "[data]\npath = g.nt\ntrain_labels = train.tsv\ntest_labels = test.tsv\n"
        "entity_column = id\nlabel_column = lab\nexclude_relations = http://x/label\n"
        f"[train]\nepochs = {epochs}\n"
    )
    return cfg


def write_lp_dataset(root, seed=0, n=30, epochs=30):
    """Tab-separated triples over ``n`` entities with one symmetric and one chain relation."""
    rng = np.random.default_rng(seed)
    triples = set()
    while len(triples) < 200:
        a, b = (int(v) for v in rng.integers(0, n, 2))
        if a == b:
            continue
        if rng.random() < 0.5:
            triples.add((f"e{a}", "sym", f"e{b}"))
            triples.add((f"e{b}", "sym", f"e{a}"))
        else:
            triples.add((f"e{a}", "next", f"e{(a + 1) % n}"))
    triples = sorted(triples)
    order = rng.permutation(len(triples))
    held = [triples[i] for i in order[:30]]
    train = [triples[i] for i in order[30:]]
    d = root / "kg"
    d.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", train), ("valid", held[:15]), ("test", held[15:])):
        (d / f"{name}.txt").write_text("".join("\t".join(t) + "\n" for t in part))
    cfg = root / "lp.cfg"
    cfg.write_text(
        "[data]\ntask = lp\nformat = tsv\npath = kg\n"
        "[model]\ndecomposition = block\nnum_bases = 4\nembed_dim = 16\n"
        f"[train]\nepochs = {epochs}\nsample_size = 60\ndropout_self = 0.2\ndropout_data = 0.5\n"
        "[eval]\neval_every = 10\n"
    )
    return cfg
