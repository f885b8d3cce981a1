#!/usr/bin/env python3
"""Regenerates the frozen fixtures under tests/fixtures.

Deterministic: the same script always writes the same bytes. The golden ranking is computed
here with a plain-Python z-score implementation that shares no code with the C++ library.
"""

import datetime as dt
import hashlib
import json
import math
import os
import random
import statistics
from urllib.parse import quote

HERE = os.path.dirname(os.path.abspath(__file__))
SEED = 20231027

ARXIV_URL = "http://arxiv.fixture/api/query"
CITATION_URL = "http://citations.fixture/graph/v1"
QUERY_CATS = ["cs.AI", "cs.CL", "cs.CV", "cs.LG"]
WINDOW = (dt.date(2023, 3, 5), dt.date(2023, 5, 13))
PAGE_SIZE = 50
BATCH_SIZE = 100
TIMESTAMP = "2023-10-27T12:00:00Z"

ATOM_HEAD = """<?xml version="1.0" encoding="UTF-8"?>
<feed xmlns="http://www.w3.org/2005/Atom">
  <link href="http://arxiv.org/api/query" rel="self" type="application/atom+xml"/>
  <title type="html">ArXiv Query: fixture</title>
  <id>http://arxiv.org/api/fixture</id>
  <updated>2023-10-27T00:00:00-04:00</updated>
  <opensearch:totalResults xmlns:opensearch="http://a9.com/-/spec/opensearch/1.1/">{total}</opensearch:totalResults>
  <opensearch:startIndex xmlns:opensearch="http://a9.com/-/spec/opensearch/1.1/">{start}</opensearch:startIndex>
  <opensearch:itemsPerPage xmlns:opensearch="http://a9.com/-/spec/opensearch/1.1/">{per_page}</opensearch:itemsPerPage>
"""
ATOM_TAIL = "</feed>\n"


def xml_escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def write(path, data):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(data)


def entry_xml(p):
    lines = ["  <entry>"]
    lines.append(f"    <id>http://arxiv.org/abs/{p['id']}v{p['version']}</id>")
    lines.append(f"    <updated>{p['published']}</updated>")
    lines.append(f"    <published>{p['published']}</published>")
    lines.append(f"    <title>{xml_escape(p['title_raw'])}</title>")
    lines.append(f"    <summary>  {xml_escape(p['abstract'])}\n    </summary>")
    for a in p["authors"]:
        lines.append(f"    <author>\n      <name>{xml_escape(a)}</name>\n    </author>")
    if p.get("comment"):
        lines.append(
            f'    <arxiv:comment xmlns:arxiv="http://arxiv.org/schemas/atom">{xml_escape(p["comment"])}</arxiv:comment>'
        )
    lines.append(f'    <link href="http://arxiv.org/abs/{p["id"]}v{p["version"]}" rel="alternate" type="text/html"/>')
    lines.append(
        f'    <arxiv:primary_category xmlns:arxiv="http://arxiv.org/schemas/atom" term="{p["primary"]}" '
        'scheme="http://arxiv.org/schemas/atom"/>'
    )
    for c in p["categories"]:
        lines.append(f'    <category term="{c}" scheme="http://arxiv.org/schemas/atom"/>')
    lines.append("  </entry>")
    return "\n".join(lines) + "\n"


def feed_xml(entries, total, start, per_page):
    return ATOM_HEAD.format(total=total, start=start, per_page=per_page) + "".join(entry_xml(e) for e in entries) + ATOM_TAIL


def arxiv_query(cats, window):
    stamp = lambda d: d.strftime("%Y%m%d")
    disj = " OR ".join(f"cat:{c}" for c in sorted(set(cats)))
    return f"({disj}) AND submittedDate:[{stamp(window[0])}0000 TO {stamp(window[1])}2359]"


def page_url(base, cats, window, start, page_size):
    return (
        f"{base}?search_query={quote(arxiv_query(cats, window), safe='')}&start={start}"
        f"&max_results={page_size}&sortBy=submittedDate&sortOrder=ascending"
    )


def cache_put(cache_dir, method, url, body, response):
    key = hashlib.sha256(f"{method} {url}\n{body}".encode()).hexdigest()
    write(os.path.join(cache_dir, key + ".body"), response)
    write(os.path.join(cache_dir, key + ".request"), f"{method} {url}\n{body}" + ("\n" if body else ""))


# --------------------------------------------------------------------------------------------
# Synthetic papers

SUBJECTS = [
    "Instruction Tuning", "Retrieval Augmentation", "Diffusion Priors", "Sparse Attention", "Graph Transformers",
    "Contrastive Pretraining", "Reward Modeling", "Token Pruning", "Prompt Compression", "Speculative Decoding",
    "Low-Rank Adaptation", "Code Generation", "Chain-of-Thought Reasoning", "Tool Use", "Preference Optimization",
]
TOPIC_PHRASES = [
    ("large language models", 0.30),
    ("ChatGPT", 0.10),
    ("Chat-GPT", 0.02),
    ("GPT-4", 0.08),
    ("LLaMA", 0.07),
    ("multimodal", 0.08),
    ("text-to-image", 0.04),
    ("LLMs", 0.10),
]
PRIMARY_WEIGHTS = [("cs.CL", 30), ("cs.LG", 25), ("cs.CV", 20), ("cs.AI", 10), ("stat.ML", 6), ("cs.RO", 5), ("math.OC", 4)]
COMMENTS = [None, None, None, "Accepted at ICML 2023", "Preprint, work in progress", "Accepted to ACL 2023",
            "12 pages, 4 figures", "ICML 2023 workshop"]

INSTITUTIONS = [
    ("stanford", "Stanford University", "academia", "US"),
    ("mit", "Massachusetts Institute of Technology", "academia", "US"),
    ("cmu", "Carnegie Mellon University", "academia", "US"),
    ("berkeley", "UC Berkeley", "academia", "US"),
    ("tsinghua", "Tsinghua University", "academia", "CN"),
    ("pku", "Peking University", "academia", "CN"),
    ("hku", "The University of Hong Kong", "academia", "HK"),
    ("oxford", "University of Oxford", "academia", "GB"),
    ("eth", "ETH Zurich", "academia", "CH"),
    ("mpi", "Max Planck Institute for Intelligent Systems", "academia", "DE"),
    ("nus", "National University of Singapore", "academia", "SG"),
    ("kaist", "KAIST", "academia", "KR"),
    ("utokyo", "The University of Tokyo", "academia", "JP"),
    ("openai", "OpenAI", "industry", "US"),
    ("google", "Google", "industry", "US"),
    ("meta", "Meta AI", "industry", "US"),
    ("microsoft", "Microsoft Research", "industry", "US"),
    ("alibaba", "Alibaba Group", "industry", "CN"),
    ("baidu", "Baidu", "industry", "CN"),
    ("deepmind", "DeepMind", "industry", "GB"),
    ("mistral", "Mistral", "industry", "FR"),
    ("naver", "NAVER", "industry", "KR"),
    ("ai2", "Allen Institute for AI", "other", "US"),
    ("tii", "Technology Innovation Institute", "other", "AE"),
]


def weighted(rng, pairs):
    total = sum(w for _, w in pairs)
    x = rng.uniform(0, total)
    for v, w in pairs:
        x -= w
        if x <= 0:
            return v
    return pairs[-1][0]


def make_papers(rng):
    papers = []
    counters = {}
    days = (WINDOW[1] - WINDOW[0]).days + 1
    dates = sorted(WINDOW[0] + dt.timedelta(days=rng.randrange(days)) for _ in range(200))
    for d in dates:
        prefix = d.strftime("%y%m")
        counters[prefix] = counters.get(prefix, 0) + rng.randint(1, 40)
        pid = f"{prefix}.{counters[prefix]:05d}"
        primary = weighted(rng, PRIMARY_WEIGHTS)
        cats = [primary]
        if primary not in QUERY_CATS or rng.random() < 0.5:
            extra = rng.choice([c for c in QUERY_CATS if c != primary])
            cats.append(extra)
        phrases = [p for p, prob in TOPIC_PHRASES if rng.random() < prob]
        subject = rng.choice(SUBJECTS)
        title = f"{subject} for {' and '.join(phrases)}" if phrases else f"Revisiting {subject}"
        if rng.random() < 0.1:
            title += ": A Study of Trade-offs, Limits & Scaling"
        title_raw = title.replace(" for ", " for\n  ", 1) if rng.random() < 0.15 else title
        abstract_bits = [f"We study {subject.lower()}."]
        if rng.random() < 0.25:
            abstract_bits.append("Experiments use GPT-3.5 as a baseline.")
        if rng.random() < 0.1:
            abstract_bits.append("We release a multi-modal benchmark.")
        abstract_bits.append("Results improve over strong baselines.")
        hh, mm, ss = rng.randrange(24), rng.randrange(60), rng.randrange(60)
        n_authors = rng.choice([1, 2, 3, 3, 4, 5, 6, 8, 12])
        papers.append(
            {
                "id": pid,
                "version": rng.choice([1, 1, 1, 2, 3]),
                "date": d,
                "published": f"{d.isoformat()}T{hh:02d}:{mm:02d}:{ss:02d}Z",
                "title": title,
                "title_raw": title_raw,
                "abstract": "\n    ".join(abstract_bits),
                "authors": [f"Author {pid}-{i + 1}" for i in range(n_authors)],
                "comment": rng.choice(COMMENTS),
                "primary": primary,
                "categories": cats,
                "citations": max(0, int(math.exp(rng.gauss(2.0, 1.6))) - 1),
            }
        )
    return papers


def make_affiliations(rng, papers):
    ids = [i[0] for i in INSTITUTIONS]
    out = []
    for p in papers:
        pool = rng.sample(ids, rng.choice([1, 1, 2, 2, 3, 4]))
        authors = []
        for _ in p["authors"]:
            aff = [rng.choice(pool)]
            if len(pool) > 1 and rng.random() < 0.15:
                aff.append(rng.choice([x for x in pool if x != aff[0]]))
            authors.append(aff)
        out.append({"base_id": p["id"], "authors": authors})
    return out


# --------------------------------------------------------------------------------------------
# Independent ranking oracle

MONDAY_FIRST = list(range(7))  # date.weekday(): Monday == 0


def week_index(d, start_weekday, epoch):
    week_zero = epoch - dt.timedelta(days=(epoch.weekday() - start_weekday) % 7)
    return (d - week_zero).days // 7


def split_z(papers, start_weekday, epoch):
    weeks = {}
    for p in papers:
        weeks.setdefault(week_index(p["date"], start_weekday, epoch), []).append(p)
    z = {}
    for members in weeks.values():
        counts = [float(m["citations"]) for m in members]
        mean = sum(counts) / len(counts)
        sd = statistics.pstdev(counts) if len(counts) > 1 else 0.0
        for m in members:
            z[m["id"]] = 0.0 if sd == 0 else (m["citations"] - mean) / sd
    return z


def oracle_ranking(papers, epoch, n):
    per_split = [split_z(papers, wd, epoch) for wd in MONDAY_FIRST]
    scored = []
    for p in papers:
        zs = [s[p["id"]] for s in per_split]
        scored.append((sum(zs) / 7 - statistics.pstdev(zs), p))
    scored.sort(key=lambda t: (-t[0], -t[1]["citations"], t[1]["id"]))
    return scored[:n]


def csv_field(s):
    if any(c in s for c in ',"\r\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def fixed6(x):
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def golden_csv(ranked, epoch):
    lines = ["rank,title,category,link,week,citations,stable_z,delta"]
    for i, (z, p) in enumerate(ranked, start=1):
        start = p["date"] - dt.timedelta(days=(p["date"].weekday() - 6) % 7)
        week = f"{start.isoformat()}/{(start + dt.timedelta(days=6)).isoformat()}"
        row = [str(i), p["title"], p["primary"], f"https://arxiv.org/abs/{p['id']}", week, str(p["citations"]), fixed6(z), ""]
        lines.append(",".join(csv_field(f) for f in row))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------------------------


def pipeline(rng):
    root = os.path.join(HERE, "pipeline")
    papers = make_papers(rng)

    # The API also returns two records whose first version falls outside the window and one
    # record repeated on a later page; the client filters and deduplicates them.
    early = dict(papers[0], id="2303.99901", date=dt.date(2023, 3, 4), published="2023-03-04T23:59:59Z",
                 title="Out of Window Before", title_raw="Out of Window Before")
    late = dict(papers[-1], id="2305.99902", date=dt.date(2023, 5, 14), published="2023-05-14T00:00:01Z",
                title="Out of Window After", title_raw="Out of Window After")
    dup = dict(papers[10], version=papers[10]["version"] + 1, title_raw="Revised duplicate title")
    feed = [early] + papers[:120] + [dup] + papers[120:] + [late]

    cache = os.path.join(root, "replay")
    if os.path.isdir(cache):
        for f in os.listdir(cache):
            os.remove(os.path.join(cache, f))
    for start in range(0, len(feed), PAGE_SIZE):
        page = feed[start:start + PAGE_SIZE]
        xml = feed_xml(page, len(feed), start, PAGE_SIZE)
        write(os.path.join(root, "feed", f"page_{start:04d}.xml"), xml)
        cache_put(cache, "GET", page_url(ARXIV_URL, QUERY_CATS, WINDOW, start, PAGE_SIZE), "", xml)

    ids = sorted(p["id"] for p in papers)
    by_id = {p["id"]: p for p in papers}
    unknown = ids[7]
    for start in range(0, len(ids), BATCH_SIZE):
        batch = ids[start:start + BATCH_SIZE]
        body = json.dumps({"ids": [f"ARXIV:{i}" for i in batch]}, separators=(",", ":"))
        resp = [None if i == unknown else {"paperId": hashlib.md5(i.encode()).hexdigest()[:40],
                                           "citationCount": by_id[i]["citations"]} for i in batch]
        cache_put(cache, "POST", f"{CITATION_URL}/paper/batch?fields=citationCount", body, json.dumps(resp))
    by_id[unknown]["citations"] = 0

    write(os.path.join(root, "citations.csv"),
          "base_id,count,found\n" + "".join(f"{i},{by_id[i]['citations']},{'false' if i == unknown else 'true'}\n" for i in ids))

    excluded_present = ids[3]
    write(os.path.join(root, "exclusions.txt"),
          "# papers removed by manual review\n"
          f"{excluded_present}v2  # duplicate of a journal version\n"
          "2212.00001\n")

    write(os.path.join(root, "registry.jsonl"), "".join(
        json.dumps({"institution_id": i, "display_name": n, "sector": s, "country": c}) + "\n"
        for i, n, s, c in INSTITUTIONS))
    write(os.path.join(root, "affiliations.jsonl"),
          "".join(json.dumps(m) + "\n" for m in make_affiliations(rng, papers)))

    config = {
        "categories": QUERY_CATS,
        "from": WINDOW[0].isoformat(),
        "to": WINDOW[1].isoformat(),
        "page_size": PAGE_SIZE,
        "batch_size": BATCH_SIZE,
        "arxiv_url": ARXIV_URL,
        "citation_url": CITATION_URL,
        "timestamp": TIMESTAMP,
        "top_n": 40,
        "trend_window": 8,
        "trend_order": 3,
        "comment_keyword": "ICML",
    }
    write(os.path.join(root, "config.json"), json.dumps(config, indent=2) + "\n")

    kept = [p for p in papers if p["id"] != excluded_present]
    write(os.path.join(root, "golden_top40.csv"), golden_csv(oracle_ranking(kept, WINDOW[0], 40), WINDOW[0]))


def paged(rng):
    """3 pages of 2 entries, plus a variant whose third page repeats an id from the first."""
    base = dt.date(2023, 3, 6)
    papers = []
    for i in range(6):
        d = base + dt.timedelta(days=i)
        papers.append({
            "id": f"2303.{10001 + i}", "version": 1, "date": d, "published": f"{d.isoformat()}T08:00:00Z",
            "title": f"Paged Paper {i + 1}", "title_raw": f"Paged Paper {i + 1}", "abstract": "Fixture abstract.",
            "authors": ["A. Author"], "comment": None, "primary": "cs.CL", "categories": ["cs.CL"],
        })
    for start in range(0, 6, 2):
        write(os.path.join(HERE, "feeds", "paged", f"page_{start}.xml"), feed_xml(papers[start:start + 2], 6, start, 2))
    dup_pages = [papers[0:2], papers[2:4], [papers[4], dict(papers[0], version=2)]]
    for k, page in enumerate(dup_pages):
        write(os.path.join(HERE, "feeds", "paged_dup", f"page_{2 * k}.xml"), feed_xml(page, 6, 2 * k, 2))


def main():
    rng = random.Random(SEED)
    pipeline(rng)
    paged(random.Random(SEED + 1))


if __name__ == "__main__":
    main()
