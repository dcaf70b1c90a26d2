#!/usr/bin/env python3
"""Regenerates the replay fixtures under fixtures/ and the keyword list under data/.

    python3 tools/make_fixtures.py [--root DIR]

Every file written is deterministic; re-running produces identical bytes.
"""

import argparse
import json
import pathlib

GROUP_COUNTS = [
    # group, (wikipedia, dbpedia, wolfram) non-empty records over 10 keywords
    ("Searches", (5, 2, 7)),
    ("News", (7, 5, 7)),
    ("Actors", (10, 9, 8)),
    ("Athletes", (9, 9, 10)),
    ("Games", (9, 7, 1)),
    ("Loss", (1, 1, 1)),
    ("Lyrics", (6, 5, 7)),
    ("Movies", (10, 2, 9)),
    ("People", (10, 9, 10)),
    ("Recipes", (10, 10, 9)),
    ("TV Shows", (10, 7, 5)),
]

SEARCHES_2020 = [
    "Coronavirus", "Election result", "Kobe Bryant", "Zoom", "IPL", "India vs New Zealand",
    "Coronavirus update", "Coronavirus symptoms", "Joe Biden", "Google Classroom",
]


def normalize(s):
    return " ".join(s.split()).lower()


def keywords_for(group):
    if group == "Searches":
        return list(SEARCHES_2020)
    return [f"{group} phrase {i}" for i in range(1, 11)]


def entry(source, key, status, body, content_type=None):
    e = {"source": source, "request_key": key, "status": status, "response_body": body}
    if content_type:
        e["content_type"] = content_type
    return e


def dumps(obj):
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def search_entry(keyword, ids, n=10):
    items = [{"kind": "youtube#searchResult", "id": {"kind": "youtube#video", "videoId": i}} for i in ids]
    return entry("youtube", f"search:{normalize(keyword)}|{n}", 200, dumps({"items": items}), "application/json")


def video_entry(vid, title, duration, captions, description="", extra_snippet=None, statistics=None):
    snippet = {
        "title": title,
        "description": description,
        "thumbnails": {"default": {"url": f"https://i.ytimg.com/vi/{vid}/default.jpg"},
                       "medium": {"url": f"https://i.ytimg.com/vi/{vid}/mqdefault.jpg"}},
    }
    snippet.update(extra_snippet or {})
    item = {"kind": "youtube#video", "id": vid, "snippet": snippet,
            "contentDetails": {"duration": duration, "caption": "true" if captions else "false"}}
    if statistics:
        item["statistics"] = statistics
    return entry("youtube", f"videos:{vid}", 200, dumps({"items": [item]}), "application/json")


def captions_entry(vid, body, content_type="text/vtt"):
    return entry("youtube", f"captions:{vid}", 200, body, content_type)


def vtt(cues):
    out = ["WEBVTT", ""]
    for start, end, text in cues:
        out += [f"{start} --> {end}", text, ""]
    return "\n".join(out)


def wikipedia(name, extract=None, redirects=()):
    if extract is None:
        page = {"ns": 0, "title": name, "missing": True}
    else:
        page = {"pageid": abs(hash_name(name)) % 10_000_000, "ns": 0, "title": name, "extract": extract}
        if redirects:
            page["redirects"] = [{"ns": 0, "title": r} for r in redirects]
    return entry("wikipedia", normalize(name), 200, dumps({"batchcomplete": True, "query": {"pages": [page]}}),
                 "application/json")


def dbpedia(name, label=None, comment="", redirects=()):
    if label is None:
        docs = []
    else:
        docs = [{"label": [f"<B>{label}</B>"], "comment": [comment], "redirectlabel": list(redirects),
                 "resource": [f"http://dbpedia.org/resource/{label.replace(' ', '_')}"]}]
    return entry("dbpedia", normalize(name), 200, dumps({"docs": docs}), "application/json")


def wolfram(name, answer=None):
    if answer is None:
        return entry("wolfram", normalize(name), 501, "Wolfram|Alpha did not understand your input", "text/plain")
    return entry("wolfram", normalize(name), 200, answer, "text/plain")


def hash_name(s):
    h = 0xCBF29CE484222325
    for b in s.encode():
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def coverage(root):
    groups, entries, gazetteer = [], [], []
    for gi, (group, (nw, nd, na)) in enumerate(GROUP_COUNTS):
        keywords = keywords_for(group)
        groups.append({"group": group, "keywords": keywords})
        for ki, kw in enumerate(keywords):
            vid = f"t{gi:02d}k{ki:02d}"
            entries.append(search_entry(kw, [vid]))
            entries.append(video_entry(vid, f"{kw} explained", "PT0M10S", True,
                                       "Like and subscribe for more trending topics."))
            entries.append(captions_entry(vid, vtt([
                ("00:00:00.000", "00:00:03.500", "Welcome back."),
                ("00:00:03.500", "00:00:07.000", f"Today we look at {kw} and why it trended in 2020."),
                ("00:00:07.000", "00:00:10.000", "Thanks for watching."),
            ])))
            gazetteer.append({"surface_forms": [kw], "category": "other", "canonical": kw})
            entries.append(wikipedia(kw, f"{kw} was one of the most searched topics of 2020.") if ki < nw
                           else wikipedia(kw))
            entries.append(dbpedia(kw, kw, f"{kw} is a topic.") if ki < nd else dbpedia(kw))
            entries.append(wolfram(kw, f"{kw} is a trending topic") if ki < na else wolfram(kw))

    data = root / "data"
    data.mkdir(parents=True, exist_ok=True)
    write(data / "keyword_groups_2020.json", groups)
    out = root / "fixtures" / "coverage"
    out.mkdir(parents=True, exist_ok=True)
    write(out / "interactions.json", entries)
    write(out / "gazetteer.json", gazetteer)


SERVICE_ENTITIES = [
    # canonical, forms, category, wikipedia extract, redirects, dbpedia comment, dbpedia redirects, wolfram
    ("Coronavirus", ["coronavirus", "covid-19", "covid"], "other",
     "Coronaviruses are a group of related RNA viruses that cause diseases in mammals and birds.",
     ["Coronaviridae", "CoV"], "Coronaviruses are enveloped positive-sense RNA viruses.", ["Corona virus", "virus"],
     "coronavirus is a virus"),
    ("Wuhan", ["wuhan"], "place", "Wuhan is the capital of Hubei province in the People's Republic of China.",
     ["Wuhan City", "Hankou"], "Wuhan is a city in central China.", ["Wu-han"],
     "Wuhan, Hubei, China"),
    ("Vaccine", ["vaccine", "vaccines"], "other",
     "A vaccine is a biological preparation that provides active acquired immunity to a particular disease.",
     ["Vaccines", "Vaccination"], "A vaccine is a biological preparation.", ["Immunization"], None),
    ("World Health Organization", ["world health organization"], "organization",
     "The World Health Organization is a specialized agency of the United Nations responsible for public health.",
     ["WHO", "World Health Organisation"], "Agency of the United Nations.", [],
     "the World Health Organization was founded April 7, 1948"),
    ("Zoom", ["zoom"], "product", "Zoom Video Communications is an American communications technology company.",
     ["Zoom Video Communications"], "", [], None),
    ("Silk Road", ["silk road"], "place", "The Silk Road was a network of Eurasian trade routes.",
     ["Silk Route"], "Ancient network of trade routes.", [], None),
]


def service(root):
    entries, gazetteer = [], []
    promo = "Support the channel! Subscribe, like, and check the links in the description. Sponsored."
    stats = {"viewCount": "1203", "likeCount": "88", "commentCount": "12"}
    channel = {"channelId": "UC123", "channelTitle": "Trending Explained", "tags": ["covid"]}

    entries.append(search_entry("coronavirus", ["cv1", "cv4", "cv2", "cv3"]))
    entries.append(search_entry("silk road", ["nar1"]))
    entries.append(entry("youtube", "search:quota test|10", 403,
                         dumps({"error": {"code": 403, "errors": [{"reason": "quotaExceeded"}]}}), "application/json"))
    entries.append(entry("youtube", "search:outage|10", 503, "", "text/plain"))

    entries.append(video_entry("cv1", "Coronavirus explained", "PT30S", True, promo, channel, stats))
    entries.append(captions_entry("cv1", vtt([
        ("00:00.000", "00:04.000", "Welcome. Today we explain the coronavirus."),
        ("00:04.000", "00:08.500", "The first cases of coronavirus were reported in Wuhan."),
        ("00:08.500", "00:12.000", "Coronavirus spreads through droplets."),
        ("00:20.000", "00:24.000", "Scientists are testing a vaccine."),
        ("00:24.000", "00:29.000", "The World Health Organization tracks every vaccine trial."),
    ])))

    entries.append(video_entry("cv2", "Coronavirus vaccine trials", "PT1M2S", True, promo, channel, stats))
    entries.append(captions_entry("cv2", "\n".join([
        "1", "00:00:01,000 --> 00:00:04,000", "Vaccine trials moved fast in 2020.", "",
        "2", "00:00:04,500 --> 00:00:08,000", "Teams met on Zoom to share coronavirus data.", "",
    ]), "application/x-subrip"))

    entries.append(video_entry("cv3", "Life in lockdown", "PT20S", True, promo, channel, stats))
    entries.append(captions_entry("cv3", "\n".join([
        "WEBVTT", "",
        "NOTE recorded at home", "",
        "STYLE", "::cue { color: yellow }", "",
        "intro", "00:00.000 --> 00:05.000 align:start", "We stayed at home and baked bread.", "",
        "00:05.000 --> 00:09.000", "Bread &amp; patience were the <i>theme</i>.", "",
    ])))

    entries.append(video_entry("cv4", "Coronavirus live stream", "P0D", False, promo, channel, stats))

    entries.append(video_entry("nar1", "History of the Silk Road", "PT15S", True, promo, channel, stats))
    entries.append(captions_entry("nar1", vtt([
        ("00:00.000", "00:05.000", "The Silk Road carried silk and spices."),
        ("00:05.000", "00:10.000", "A history of narcotics trade followed later."),
    ])))

    entries.append(video_entry("bad1", "Broken captions", "PT5S", True))
    entries.append(captions_entry("bad1", "1\n00:00:01,000 -> 00:00:02,000\nhello\n", "application/x-subrip"))

    for canonical, forms, category, extract, redirects, comment, db_redirects, answer in SERVICE_ENTITIES:
        gazetteer.append({"surface_forms": forms, "category": category, "canonical": canonical})
        entries.append(wikipedia(canonical, extract, redirects))
        entries.append(dbpedia(canonical, canonical, comment, db_redirects))
        entries.append(wolfram(canonical, answer))

    out = root / "fixtures" / "service"
    out.mkdir(parents=True, exist_ok=True)
    write(out / "interactions.json", entries)
    write(out / "gazetteer.json", gazetteer)
    write(out / "policy_exclude.json", {"action": "exclude", "terms": [{"term": "narcotics", "category": "narcotics"}]})
    write(out / "policy_redact.json", {"action": "redact", "terms": [{"term": "narcotics", "category": "narcotics"}]})


def write(path, obj):
    path.write_text(json.dumps(obj, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--root", type=pathlib.Path, default=pathlib.Path(__file__).resolve().parent.parent)
    args = ap.parse_args()
    coverage(args.root)
    service(args.root)


if __name__ == "__main__":
    main()
