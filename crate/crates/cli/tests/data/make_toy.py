"""Regenerate the toy corpus used by the CLI tests.

Writes toy.tkc (subword rows), toy.vocab, toy.meta and reference.txt.
Three themes share the word "bank"; "the" appears everywhere.
"""
import random
import struct

random.seed(7)
DIM = 8
THEMES = {
    "river": ["water", "river", "shore", "boat", "fish", "bank"],
    "money": ["money", "loan", "account", "cash", "credit", "bank"],
    "music": ["song", "band", "guitar", "drum", "album", "tour"],
}
TAGS = {"bank": "NOUN", "the": "DET", "tour": "NOUN", "credit": "NOUN", "fish": "NOUN",
        "boat": "NOUN", "shore": "NOUN", "river": "NOUN", "water": "NOUN", "money": "NOUN",
        "loan": "NOUN", "account": "NOUN", "cash": "NOUN", "song": "NOUN", "band": "NOUN",
        "guitar": "NOUN", "drum": "NOUN", "album": "NOUN"}
SPLIT = {"guitar", "account", "river"}  # written as two subword rows

centers = {}
for name in THEMES:
    v = [random.gauss(0, 1) for _ in range(DIM)]
    centers[name] = v

vocab = ["the"] + sorted({w for ws in THEMES.values() for w in ws}) + ["rareword"]
type_id = {w: i for i, w in enumerate(vocab)}

docs = []
names = list(THEMES)
for d in range(24):
    theme = names[d % 3]
    words = ["the"] + [random.choice(THEMES[theme]) for _ in range(29)]
    if d == 5:
        words.append("rareword")
    docs.append((theme, words))

rows = []
for d, (theme, words) in enumerate(docs):
    for j, w in enumerate(words):
        base = centers[theme]
        vec = [b + random.gauss(0, 0.15) for b in base]
        parts = 2 if w in SPLIT else 1
        for _ in range(parts):
            rows.append((d, j, type_id[w], [x + random.gauss(0, 0.05) for x in vec]))

with open("toy.tkc", "wb") as f:
    f.write(b"TKC1" + struct.pack("<IIQI", 1, DIM, len(rows), 1))
    for d, j, t, vec in rows:
        f.write(struct.pack("<III", d, j, t) + struct.pack("<%df" % DIM, *vec))

df = {w: sum(1 for _, ws in docs if w in ws) for w in vocab}
with open("toy.vocab", "w") as f:
    f.write("# total_docs=%d\n" % len(docs))
    for w in vocab:
        f.write("%s\t%d\t%s\n" % (w, df[w], TAGS.get(w, "-")))

with open("toy.meta", "w") as f:
    for d, (theme, _) in enumerate(docs):
        f.write("%d\tcategory=%s\tyear=%d\n" % (d, theme, 2001 + d // 6))

with open("reference.txt", "w") as f:
    for i in range(8):
        theme = names[i % 3]
        f.write(" ".join(random.choice(THEMES[theme] + ["of", "and"]) for _ in range(40)) + "\n")
