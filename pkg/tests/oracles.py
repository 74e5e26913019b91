"""Independent reference implementations used to cross-check the real code.

These deliberately avoid the production code paths: span location works by
raw line scanning and indentation counting; downsampling by naive slicing.
"""

from __future__ import annotations


def _code_lines(text: str) -> list[tuple[int, int, str]]:
    """(lineno, indent, stripped) for non-blank, non-comment lines."""
    out = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        stripped = raw.strip(" ")
        if stripped == "" or stripped.startswith("#"):
            continue
        out.append((lineno, len(raw) - len(raw.lstrip(" ")), stripped))
    return out


def scan_spans(text: str) -> dict:
    """Locate class/def headers and their block extents by indentation only.

    Returns {class name: {"span", "init", "forward", "assigns"}} with spans
    as (start, end) line pairs and assigns as {attr: line}.
    """
    lines = _code_lines(text)
    result: dict[str, dict] = {}

    def block_end(start_idx: int, header_indent: int) -> int:
        """Last code line of the block opened at lines[start_idx]."""
        end = lines[start_idx][0]
        for lineno, indent, _ in lines[start_idx + 1:]:
            if indent <= header_indent:
                break
            end = lineno
        return end

    for i, (lineno, indent, stripped) in enumerate(lines):
        if indent == 0 and stripped.startswith("class "):
            name = stripped[len("class "):].split("(")[0].strip()
            cls = {"span": (lineno, block_end(i, 0)), "assigns": {}}
            for j in range(i + 1, len(lines)):
                l2, ind2, s2 = lines[j]
                if ind2 == 0:
                    break
                if ind2 == 4 and s2.startswith("def __init__"):
                    cls["init"] = (l2, block_end(j, 4))
                elif ind2 == 4 and s2.startswith("def forward"):
                    cls["forward"] = (l2, block_end(j, 4))
                elif ind2 == 8 and s2.startswith("self.") and "=" in s2 \
                        and "init" in cls and l2 <= cls["init"][1]:
                    attr = s2[len("self."):].split("=")[0].strip()
                    cls["assigns"][attr] = l2
            result[name] = cls
    return result


def bucket_downsample(points: list[tuple[int, float]], max_points: int) -> list[dict]:
    """Naive reference bucketing: first (L mod N) buckets one larger, last
    step of bucket, arithmetic mean of values."""
    n = len(points)
    if n <= max_points:
        return [{"step": s, "value": v} for s, v in points]
    sizes = []
    base = n // max_points
    extra = n % max_points
    for b in range(max_points):
        sizes.append(base + 1 if b < extra else base)
    out = []
    start = 0
    for size in sizes:
        chunk = points[start:start + size]
        start += size
        mean = sum(v for _, v in chunk) / len(chunk)
        out.append({"step": chunk[-1][0], "value": mean})
    return out
