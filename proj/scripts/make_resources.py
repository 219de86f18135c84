"""Regenerate data/lemma_map.tsv and data/stopwords.txt.

Sources: the spaCy English lookup lemmatizer table (spacy-lookups-data,
en_lemma_lookup.json.gz, WordNet-derived) and spaCy's English stop words.

usage: make_resources.py <spacy_lookups_data.whl> <spacy/lang/en/stop_words.py> <out_dir>
"""
import gzip
import json
import re
import sys
import zipfile

TOKEN = re.compile(r"[a-z0-9]+")


def main(wheel, stop_words_py, out_dir):
    with zipfile.ZipFile(wheel) as z:
        raw = json.loads(gzip.decompress(z.read("spacy_lookups_data/data/en_lemma_lookup.json.gz")))
    table = {}
    for surface, lemma in raw.items():
        s, l = surface.lower(), lemma.lower()
        if TOKEN.fullmatch(s) and TOKEN.fullmatch(l) and s != l and s not in table:
            table[s] = l

    # Close the map so that lemma(lemma(x)) == lemma(x); drop entries on cycles.
    closed = {}
    for s in table:
        seen = {s}
        cur = table[s]
        while cur in table and cur not in seen:
            seen.add(cur)
            cur = table[cur]
        if cur in table:
            continue
        closed[s] = cur
    closed = {s: l for s, l in closed.items() if s != l}

    scope = {}
    exec(open(stop_words_py).read(), scope)
    stops = sorted({w.lower() for w in scope["STOP_WORDS"] if TOKEN.fullmatch(w.lower())})

    with open(f"{out_dir}/lemma_map.tsv", "w", newline="\n") as f:
        for s in sorted(closed):
            f.write(f"{s}\t{closed[s]}\n")
    with open(f"{out_dir}/stopwords.txt", "w", newline="\n") as f:
        for w in stops:
            f.write(w + "\n")
    print(len(closed), "lemma entries,", len(stops), "stop words")


if __name__ == "__main__":
    main(*sys.argv[1:4])
