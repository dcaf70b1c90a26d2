#!/usr/bin/env python3
"""Writes the subtitle parser corpus to tests/data/subtitles/ with a manifest.

    python3 tools/make_subtitle_corpus.py [--root DIR]
"""

import argparse
import json
import pathlib

BOM = "﻿"

# name, body, expectation. Valid: {"cues": n}; malformed: {"error": kind, "line": n}.
CASES = [
    ("basic.srt", "1\n00:00:01,000 --> 00:00:04,000\nHello there.\n\n2\n00:00:05,000 --> 00:00:07,500\nGeneral Kenobi.\n",
     {"cues": 2}),
    ("basic.vtt", "WEBVTT\n\n00:01.000 --> 00:04.000\nHello there.\n\n00:05.000 --> 00:07.500\nGeneral Kenobi.\n",
     {"cues": 2}),
    ("bom.srt", BOM + "1\n00:00:00,500 --> 00:00:02,000\nByte order mark first.\n", {"cues": 1}),
    ("bom.vtt", BOM + "WEBVTT\n\n00:00.500 --> 00:02.000\nByte order mark first.\n", {"cues": 1}),
    ("crlf.srt", "1\r\n00:00:01,000 --> 00:00:02,000\r\nWindows line endings.\r\n\r\n2\r\n00:00:03,000 --> 00:00:04,000\r\nStill fine.\r\n",
     {"cues": 2}),
    ("crlf.vtt", "WEBVTT\r\n\r\n00:01.000 --> 00:02.000\r\nWindows line endings.\r\n", {"cues": 1}),
    ("multiline.srt", "1\n00:00:01,000 --> 00:00:04,000\nFirst line\nsecond line\n", {"cues": 1}),
    ("tags.srt", "1\n00:00:01,000 --> 00:00:03,000\n<i>Italic</i> and <b>bold</b> text.\n", {"cues": 1}),
    ("tags.vtt", "WEBVTT\n\n00:01.000 --> 00:03.000\n<v Roger>Voice span</v> &amp; <c.yellow>class</c>.\n", {"cues": 1}),
    ("overlapping.srt", "1\n00:00:01,000 --> 00:00:05,000\nLong cue.\n\n2\n00:00:02,000 --> 00:00:03,000\nNested cue.\n\n"
     "3\n00:00:04,000 --> 00:00:06,000\nStraddling cue.\n", {"cues": 3}),
    ("overlapping.vtt", "WEBVTT\n\n00:01.000 --> 00:05.000\nLong cue.\n\n00:02.000 --> 00:03.000\nNested cue.\n", {"cues": 2}),
    ("unsorted.srt", "1\n00:00:09,000 --> 00:00:10,000\nLater.\n\n2\n00:00:01,000 --> 00:00:02,000\nEarlier.\n", {"cues": 2}),
    ("note_blocks.vtt", "WEBVTT\n\nNOTE a single line note\n\nNOTE\nmulti line\nnote body\n\n00:01.000 --> 00:02.000\nAfter notes.\n",
     {"cues": 1}),
    ("style_region.vtt", "WEBVTT\n\nSTYLE\n::cue { color: lime }\n\nREGION\nid:fred width:40%\n\n"
     "00:01.000 --> 00:02.000 region:fred\nStyled.\n", {"cues": 1}),
    ("header_text.vtt", "WEBVTT - lecture captions\nKind: captions\nLanguage: en\n\n00:01.000 --> 00:02.000\nHeader metadata.\n",
     {"cues": 1}),
    ("identifiers.vtt", "WEBVTT\n\nintro\n00:00.000 --> 00:02.000\nWith an id.\n\n42\n00:02.000 --> 00:03.000\nNumeric id.\n",
     {"cues": 2}),
    ("settings.vtt", "WEBVTT\n\n00:01.000 --> 00:02.000 align:start position:10% line:0\nPositioned.\n", {"cues": 1}),
    ("hours.vtt", "WEBVTT\n\n01:02:03.004 --> 01:02:05.000\nHour field.\n", {"cues": 1}),
    ("long_hours.srt", "1\n100:00:00,000 --> 100:00:01,000\nVery long recording.\n", {"cues": 1}),
    ("no_numbers.srt", "00:00:01,000 --> 00:00:02,000\nNo counter line.\n", {"cues": 1}),
    ("extra_blank_lines.srt", "\n\n1\n00:00:01,000 --> 00:00:02,000\nPadded.\n\n\n\n2\n00:00:03,000 --> 00:00:04,000\nMore.\n\n\n",
     {"cues": 2}),
    ("empty.srt", "", {"cues": 0}),
    ("header_only.vtt", "WEBVTT\n", {"cues": 0}),
    ("empty_text.srt", "1\n00:00:01,000 --> 00:00:02,000\n\n2\n00:00:03,000 --> 00:00:04,000\nKept.\n", {"cues": 1}),
    ("unicode.srt", "1\n00:00:01,000 --> 00:00:02,000\nCafé 中文 مرحبا \U0001F600\n", {"cues": 1}),
    ("invalid_utf8.srt", b"1\n00:00:01,000 --> 00:00:02,000\nbad \xff\xfe bytes\n", {"cues": 1}),
    ("adjacent.vtt", "WEBVTT\n\n00:00.000 --> 00:01.000\nOne.\n\n00:01.000 --> 00:02.000\nTwo.\n\n00:02.000 --> 00:03.000\nThree.\n",
     {"cues": 3}),
    ("gaps.srt", "1\n00:00:00,000 --> 00:00:01,000\nFirst run.\n\n2\n00:00:20,000 --> 00:00:21,000\nSecond run.\n", {"cues": 2}),
    # malformed
    ("bad_arrow.srt", "1\n00:00:01,000 -> 00:00:02,000\nArrow too short.\n", {"error": "MalformedTimestamp", "line": 2}),
    ("bad_separator.srt", "1\n00:00:01.000 --> 00:00:02.000\nVTT separator in SRT.\n",
     {"error": "MalformedTimestamp", "line": 2}),
    ("bad_minutes.srt", "1\n00:00:01,000 --> 00:00:02,000\nFine.\n\n2\n00:61:00,000 --> 00:62:00,000\nMinutes out of range.\n",
     {"error": "MalformedTimestamp", "line": 6}),
    ("missing_timing.srt", "1\n00:00:01,000 --> 00:00:02,000\nFine.\n\n2\n", {"error": "MalformedTimestamp", "line": 6}),
    ("text_instead_of_timing.srt", "1\nThis is not a timing line\n", {"error": "MalformedTimestamp", "line": 2}),
    ("inverted.srt", "1\n00:00:05,000 --> 00:00:01,000\nBackwards.\n", {"error": "InvertedRange", "line": 2}),
    ("zero_length.srt", "1\n00:00:01,000 --> 00:00:01,000\nNo duration.\n", {"error": "InvertedRange", "line": 2}),
    ("srt_settings.srt", "1\n00:00:01,000 --> 00:00:02,000 X1:10\nSettings are not SRT.\n",
     {"error": "MalformedTimestamp", "line": 2}),
    ("missing_header.vtt", "00:01.000 --> 00:02.000\nNo signature.\n", {"error": "MissingSignature", "line": 1}),
    ("lowercase_header.vtt", "webvtt\n\n00:01.000 --> 00:02.000\nWrong case.\n", {"error": "MissingSignature", "line": 1}),
    ("bad_vtt_timestamp.vtt", "WEBVTT\n\n00:01.000 --> 00:02.000\nFine.\n\n00:03,000 --> 00:04,000\nComma separator.\n",
     {"error": "MalformedTimestamp", "line": 6}),
    ("inverted.vtt", "WEBVTT\n\nNOTE before\n\n00:09.000 --> 00:02.000\nBackwards.\n", {"error": "InvertedRange", "line": 5}),
    ("id_without_timing.vtt", "WEBVTT\n\nlonely-identifier\n", {"error": "MalformedTimestamp", "line": 3}),
    ("crlf_bad.srt", "1\r\n00:00:01,000 --> 00:00:02,000\r\nFine.\r\n\r\n2\r\n00:00:0x,000 --> 00:00:04,000\r\nBad digit.\r\n",
     {"error": "MalformedTimestamp", "line": 6}),
]

# Documents that describe the same cues in both formats.
EQUIVALENT = [("basic.srt", "basic.vtt"), ("bom.srt", "bom.vtt")]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--root", type=pathlib.Path, default=pathlib.Path(__file__).resolve().parent.parent)
    out = ap.parse_args().root / "tests" / "data" / "subtitles"
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name, body, expect in CASES:
        (out / name).write_bytes(body if isinstance(body, bytes) else body.encode("utf-8"))
        manifest.append({"file": name, **expect})
    doc = {"files": manifest, "equivalent": [list(p) for p in EQUIVALENT]}
    (out / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
