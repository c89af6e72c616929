"""Plain-text formats for profiles and instance pairs.

Profile::

    sm 2 2
    m1: w2 (w1 w3)
    w1: m1

The header is ``sm <n_left> <n_right>`` or ``hr <n_residents> <n_hospitals>``.
Hospital lines carry their quota, ``h1[2]: r1 r2``.  Parenthesised tokens form
a tie group; a missing line means an empty list.  Agents default to
``m1..``/``w1..`` (``r1..``/``h1..`` for HR; ``m<i>`` is accepted for residents
too).  Other names can be declared right after the header with
``left: <names>`` and ``right: <names>``.

Instance pair::

    #profile1
    ...
    #profile2
    ...
    #matching1
    m1 w2
    k=4
    b=0
"""
from __future__ import annotations

import re
from pathlib import Path

from .core import InstancePair, Matching, PreferenceProfile, Side, validate_and_normalize
from .errors import ParseError

_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_HEAD = re.compile(r"^(?P<name>[^\s:\[\]]+)(\[(?P<cap>-?\d+)\])?\s*:(?P<rest>.*)$")


def _name_index(names, aliases=()):
    table = {}
    for i, nm in enumerate(names):
        if nm in table:
            raise ParseError(f"duplicate agent name {nm!r}")
        table[nm] = i
    for alias, i in aliases:
        table.setdefault(alias, i)
    return table


def _tokens(text: str, lookup: dict, owner: str) -> list:
    groups, current = [], None
    for tok in _TOKEN.findall(text):
        if tok == "(":
            if current is not None:
                raise ParseError(f"nested parentheses in the list of {owner}")
            current = []
        elif tok == ")":
            if current is None:
                raise ParseError(f"unbalanced ')' in the list of {owner}")
            if current:
                groups.append(current)
            current = None
        else:
            if tok not in lookup:
                raise ParseError(f"{owner} lists unknown agent {tok!r}")
            if current is None:
                groups.append([lookup[tok]])
            else:
                current.append(lookup[tok])
    if current is not None:
        raise ParseError(f"unclosed '(' in the list of {owner}")
    return groups


def parse_profile(text: str) -> PreferenceProfile:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("%")]
    if not lines:
        raise ParseError("empty profile")
    head = lines[0].split()
    if len(head) != 3 or head[0] not in ("sm", "hr"):
        raise ParseError(f"bad header {lines[0]!r}")
    mode = head[0]
    try:
        n_left, n_right = int(head[1]), int(head[2])
    except ValueError as exc:
        raise ParseError(f"bad header {lines[0]!r}") from exc
    body = lines[1:]
    left_names = right_names = None
    while body and re.match(r"^(left|right)\s*:", body[0]) and not _HEAD.match(body[0]).group("cap"):
        key, _, rest = body[0].partition(":")
        names = rest.split()
        if key.strip() == "left":
            left_names = names
        else:
            right_names = names
        body = body[1:]
    if left_names is not None and len(left_names) != n_left:
        raise ParseError("left name list does not match the header")
    if right_names is not None and len(right_names) != n_right:
        raise ParseError("right name list does not match the header")
    lprefix, rprefix = ("r", "h") if mode == "hr" else ("m", "w")
    ln = left_names or [f"{lprefix}{i + 1}" for i in range(n_left)]
    rn = right_names or [f"{rprefix}{j + 1}" for j in range(n_right)]
    laliases = [(f"m{i + 1}", i) for i in range(n_left)] if mode == "hr" and left_names is None else []
    lmap, rmap = _name_index(ln, laliases), _name_index(rn)
    left = [[] for _ in range(n_left)]
    right = [[] for _ in range(n_right)]
    caps = [1] * n_right
    seen = set()
    for line in body:
        m = _HEAD.match(line)
        if not m:
            raise ParseError(f"cannot parse line {line!r}")
        name = m.group("name")
        in_l, in_r = name in lmap, name in rmap
        if in_l == in_r:
            raise ParseError(f"agent {name!r} is {'ambiguous' if in_l else 'unknown'}")
        key = (in_r, name)
        if key in seen:
            raise ParseError(f"agent {name!r} has two lines")
        seen.add(key)
        if in_l:
            if m.group("cap"):
                raise ParseError(f"left agent {name!r} cannot carry a quota")
            left[lmap[name]] = _tokens(m.group("rest"), rmap, name)
        else:
            j = rmap[name]
            if m.group("cap"):
                caps[j] = int(m.group("cap"))
            right[j] = _tokens(m.group("rest"), lmap, name)
    return validate_and_normalize(left, right, caps, mode=mode,
                                  left_names=left_names, right_names=right_names)


def _fmt_list(pl, names) -> str:
    out = []
    for grp in pl:
        if len(grp) == 1:
            out.append(names[grp[0]])
        else:
            out.append("(" + " ".join(names[x] for x in grp) + ")")
    return " ".join(out)


def format_profile(profile: PreferenceProfile) -> str:
    ln, rn = profile.names(Side.LEFT), profile.names(Side.RIGHT)
    lines = [f"{profile.mode} {profile.n_left} {profile.n_right}"]
    if profile.left_names:
        lines.append("left: " + " ".join(ln))
    if profile.right_names:
        lines.append("right: " + " ".join(rn))
    for i, pl in enumerate(profile.left):
        lines.append(f"{ln[i]}: {_fmt_list(pl, rn)}".rstrip())
    for j, pl in enumerate(profile.right):
        quota = f"[{profile.capacities[j]}]" if profile.mode == "hr" else ""
        lines.append(f"{rn[j]}{quota}: {_fmt_list(pl, ln)}".rstrip())
    return "\n".join(lines) + "\n"


def format_matching(matching: Matching, profile: PreferenceProfile) -> str:
    ln, rn = profile.names(Side.LEFT), profile.names(Side.RIGHT)
    return "".join(f"{ln[m]} {rn[w]}\n" for m, w in sorted(matching.pairs))


def parse_pair(text: str) -> InstancePair:
    sections = {}
    current = None
    budgets = {"k": 0, "b": 0}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            current = line[1:].strip()
            if current not in ("profile1", "profile2", "matching1"):
                raise ParseError(f"unknown section {line!r}")
            sections[current] = []
            continue
        m = re.match(r"^([kb])\s*=\s*(\d+)$", line)
        if m:
            budgets[m.group(1)] = int(m.group(2))
            continue
        if current is None:
            if line:
                raise ParseError(f"text before the first section: {line!r}")
            continue
        sections[current].append(line)
    for key in ("profile1", "profile2"):
        if key not in sections:
            raise ParseError(f"missing #{key} section")
    p1 = parse_profile("\n".join(sections["profile1"]))
    p2 = parse_profile("\n".join(sections["profile2"]))
    lmap = _name_index(p1.names(Side.LEFT))
    rmap = _name_index(p1.names(Side.RIGHT))
    if p1.mode == "hr" and not p1.left_names:
        lmap.update({f"m{i + 1}": i for i in range(p1.n_left)})
    pairs = []
    for line in sections.get("matching1", []):
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in lmap or parts[1] not in rmap:
            raise ParseError(f"bad matching line {line!r}")
        pairs.append((lmap[parts[0]], rmap[parts[1]]))
    return InstancePair(p1, p2, Matching(pairs), budgets["k"], budgets["b"])


def format_pair(pair: InstancePair, include_b: bool = True) -> str:
    out = ["#profile1", format_profile(pair.profile_1).rstrip(),
           "#profile2", format_profile(pair.profile_2).rstrip(),
           "#matching1"]
    body = format_matching(pair.matching_1, pair.profile_1).rstrip()
    if body:
        out.append(body)
    out.append(f"k={pair.budget_k}")
    if include_b:
        out.append(f"b={pair.budget_b}")
    return "\n".join(out) + "\n"


def read_profile(path) -> PreferenceProfile:
    return parse_profile(Path(path).read_text())


def write_profile(profile: PreferenceProfile, path) -> None:
    Path(path).write_text(format_profile(profile))


def read_pair(path) -> InstancePair:
    return parse_pair(Path(path).read_text())


def write_pair(pair: InstancePair, path) -> None:
    Path(path).write_text(format_pair(pair))
