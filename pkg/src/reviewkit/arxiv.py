"""Minimal arXiv export-API client (Atom feeds).

Requests against the live API are rate-limited to one every three seconds,
per the repository's usage policy.  The fetch step is injectable so tests
run against recorded feeds.
"""

from __future__ import annotations

import logging
import re
import threading
import time
import urllib.parse
import xml.etree.ElementTree as ET
from typing import Callable

import requests

from .errors import FeedParseError, InvalidInputError, RetrievalUnavailableError
from .types import BibEntry, is_arxiv_id

logger = logging.getLogger(__name__)

EXPORT_URL = "http://export.arxiv.org/api/query"
_ATOM_NS = {"atom": "http://www.w3.org/2005/Atom"}

MIN_REQUEST_INTERVAL = 3.0
_MAX_RESULTS_CAP = 50


class _RateLimiter:
    def __init__(self, min_interval: float):
        self.min_interval = min_interval
        self._lock = threading.Lock()
        self._last = 0.0

    def wait(self):
        with self._lock:
            now = time.monotonic()
            delay = self._last + self.min_interval - now
            if delay > 0:
                time.sleep(delay)
            self._last = time.monotonic()


_LIMITER = _RateLimiter(MIN_REQUEST_INTERVAL)


def _http_fetch(url: str, timeout: float, max_retries: int) -> str:
    last_error: Exception | None = None
    for attempt in range(max_retries + 1):
        _LIMITER.wait()
        try:
            response = requests.get(url, timeout=timeout)
            if response.status_code >= 500:
                raise requests.HTTPError(f"HTTP {response.status_code}")
            response.raise_for_status()
            return response.text
        except requests.RequestException as exc:
            last_error = exc
            logger.warning("arXiv fetch attempt %d failed: %s", attempt + 1, exc)
    raise RetrievalUnavailableError(
        f"arXiv unreachable after {max_retries + 1} attempts: {last_error}"
    ) from last_error


_ID_IN_URL = re.compile(r"/abs/(.+?)/?$")


def _entry_arxiv_id(raw_id: str) -> str:
    match = _ID_IN_URL.search(raw_id.strip())
    candidate = match.group(1) if match else raw_id.strip()
    return candidate


def parse_atom_feed(xml_text: str) -> list[BibEntry]:
    """Parse an arXiv Atom feed, preserving feed order as relevance rank.

    Each entry's excerpt list is initialized to its abstract.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise FeedParseError(f"not a parseable Atom document: {exc}") from exc
    entries = []
    for element in root.findall("atom:entry", _ATOM_NS):
        raw_id = element.findtext("atom:id", default="", namespaces=_ATOM_NS)
        arxiv_id = _entry_arxiv_id(raw_id)
        if not is_arxiv_id(arxiv_id):
            raise FeedParseError(f"entry id {raw_id!r} is not an arXiv identifier")
        title = " ".join(
            (element.findtext("atom:title", default="", namespaces=_ATOM_NS) or "").split()
        )
        abstract = (
            element.findtext("atom:summary", default="", namespaces=_ATOM_NS) or ""
        ).strip()
        authors = tuple(
            name
            for author in element.findall("atom:author", _ATOM_NS)
            if (name := author.findtext("atom:name", default="", namespaces=_ATOM_NS))
        )
        link = element.find("atom:link[@type='text/html']", _ATOM_NS)
        url = link.attrib.get("href", "") if link is not None else raw_id.strip()
        entries.append(
            BibEntry(
                arxiv_id=arxiv_id,
                title=title,
                authors=authors,
                abstract=abstract,
                url=url,
                excerpts=(abstract,) if abstract else (),
            )
        )
    return entries


def search_arxiv(
    query: str,
    max_results: int = 5,
    *,
    fetch: Callable[[str], str] | None = None,
    timeout: float = 30.0,
    max_retries: int = 3,
) -> list[BibEntry]:
    """All-fields arXiv search returning entries in feed (relevance) order.

    ``fetch`` replaces the HTTP layer when given a recorded feed; the rate
    limiter only applies to real requests.
    """
    if not query.strip():
        raise InvalidInputError("query must be non-empty")
    if not 1 <= max_results <= _MAX_RESULTS_CAP:
        raise InvalidInputError(
            f"max_results must lie in [1, {_MAX_RESULTS_CAP}], got {max_results}"
        )
    params = urllib.parse.urlencode(
        {
            "search_query": f"all:{query}",
            "start": 0,
            "max_results": max_results,
            "sortBy": "relevance",
            "sortOrder": "descending",
        }
    )
    url = f"{EXPORT_URL}?{params}"
    xml_text = fetch(url) if fetch is not None else _http_fetch(url, timeout, max_retries)
    return parse_atom_feed(xml_text)[:max_results]
