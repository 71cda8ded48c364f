"""Provider-agnostic chat client with record/replay caching.

One wire dialect (OpenAI-style chat completions over HTTPS) serves every
provider; differences reduce to a base URL and an auth header, resolved
from ``SLIME_BASE_URL_<PROVIDER>`` / ``SLIME_API_KEY_<PROVIDER>``.

Requests are content-addressed: the hash of the canonicalized request keys
an append-only JSONL cache. In replay mode no transport is ever touched, so
the whole attack pipeline runs offline and deterministically.
"""
from __future__ import annotations

import base64
import hashlib
import json
import os
import random
import re
import threading
import time
from collections import deque
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import CacheMiss, NoInputs, ParseError, ProviderError
from .metrics.scene import PREDICATES, StructuredScene

DEFAULT_MAX_TOKENS = 1024
_MEDIA_TYPES = {".png": "image/png", ".jpg": "image/jpeg", ".jpeg": "image/jpeg",
                ".gif": "image/gif", ".webp": "image/webp"}


# --- prompt templates -----------------------------------------------------------


def load_template(name: str) -> tuple[str, str]:
    """(template_id, body) for a versioned prompt file shipped with the package."""
    text = (resources.files("semleak") / "prompts" / f"{name}.txt").read_text("utf-8")
    header, _, body = text.partition("\n---\n")
    template_id = header.split(":", 1)[1].strip()
    return template_id, body.strip()


# --- requests and hashing ---------------------------------------------------------


@dataclass(frozen=True)
class ChatMessage:
    role: str
    text: str
    image_b64: str | None = None
    image_media_type: str | None = None


@dataclass(frozen=True)
class ChatRequest:
    provider: str
    model: str
    messages: tuple
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = 0.0

    def canonical(self) -> str:
        doc = {
            "provider": self.provider,
            "model": self.model,
            "max_tokens": self.max_tokens,
            "temperature": self.temperature,
            "messages": [
                {
                    "role": m.role,
                    "text": m.text,
                    "image_b64": m.image_b64,
                    "image_media_type": m.image_media_type,
                }
                for m in self.messages
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                          ensure_ascii=False)

    @property
    def request_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def wire_payload(self) -> dict:
        messages = []
        for m in self.messages:
            if m.image_b64 is None:
                messages.append({"role": m.role, "content": m.text})
            else:
                messages.append({
                    "role": m.role,
                    "content": [
                        {"type": "text", "text": m.text},
                        {"type": "image_url", "image_url": {
                            "url": f"data:{m.image_media_type};base64,{m.image_b64}"
                        }},
                    ],
                })
        return {
            "model": self.model,
            "messages": messages,
            "max_tokens": self.max_tokens,
            "temperature": self.temperature,
        }


# --- replay cache -----------------------------------------------------------------


class ReplayCache:
    """Append-only store of request_hash -> response text (JSONL on disk)."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, str] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    self._entries.setdefault(obj["hash"], obj["response"])

    def get(self, request_hash: str) -> str | None:
        return self._entries.get(request_hash)

    def put(self, request: ChatRequest, response: str) -> None:
        with self._lock:
            if request.request_hash in self._entries:
                return  # record mode never overwrites
            self._entries[request.request_hash] = response
            if self.path is not None:
                entry = {
                    "hash": request.request_hash,
                    "provider": request.provider,
                    "request": json.loads(request.canonical()),
                    "response": response,
                    "timestamp": 0,
                }
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True)
                             + "\n")

    def __contains__(self, request_hash: str) -> bool:
        return request_hash in self._entries

    def __len__(self) -> int:
        return len(self._entries)


# --- bounded concurrency -------------------------------------------------------------


class FifoLimiter:
    """At most `limit` holders; blocked acquirers are served oldest-first."""

    def __init__(self, limit: int):
        self._limit = max(1, int(limit))
        self._lock = threading.Lock()
        self._waiters: deque[threading.Event] = deque()
        self._active = 0

    def acquire(self) -> None:
        with self._lock:
            if self._active < self._limit and not self._waiters:
                self._active += 1
                return
            event = threading.Event()
            self._waiters.append(event)
        event.wait()

    def release(self) -> None:
        with self._lock:
            if self._waiters:
                self._waiters.popleft().set()  # slot passes directly to next in line
            else:
                self._active -= 1

    def __enter__(self):
        self.acquire()
        return self

    def __exit__(self, *exc):
        self.release()
        return False


# --- transports -------------------------------------------------------------------


class HttpTransport:
    """POST JSON over HTTPS; returns (status_code, body_text)."""

    def __init__(self, timeout: float = 120.0):
        self.timeout = timeout

    def __call__(self, url, headers, payload):
        import requests

        resp = requests.post(url, headers=headers, json=payload,
                             timeout=self.timeout)
        return resp.status_code, resp.text


class FailOnUseTransport:
    """Injected in offline tests: any network attempt is a hard failure."""

    def __init__(self):
        self.calls = 0

    def __call__(self, url, headers, payload):
        self.calls += 1
        raise AssertionError("network transport used in replay mode")


def _retryable(status: int) -> bool:
    return status == 429 or 500 <= status <= 599


class ChatClient:
    """Chat-completion client with retries, bounded concurrency, and caching.

    Modes: ``live`` (always network), ``record`` (network on cache miss,
    responses appended), ``replay`` (cache only; a miss raises CacheMiss
    without touching the transport).
    """

    def __init__(self, provider: str, model: str, mode: str = "replay",
                 cache: ReplayCache | None = None, transport=None,
                 base_url: str | None = None, api_key: str | None = None,
                 max_retries: int = 5, backoff_base: float = 1.0,
                 concurrency: int = 4, sleep=None, jitter=None,
                 max_tokens: int = DEFAULT_MAX_TOKENS):
        if mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown mode {mode!r}")
        self.provider = provider
        self.model = model
        self.mode = mode
        self.cache = cache if cache is not None else ReplayCache()
        self.transport = transport
        self.base_url = base_url or os.environ.get(
            f"SLIME_BASE_URL_{provider.upper().replace('-', '_')}")
        self.api_key = api_key or os.environ.get(
            f"SLIME_API_KEY_{provider.upper().replace('-', '_')}")
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.max_tokens = max_tokens
        self._limiter = FifoLimiter(concurrency)
        self._sleep = sleep if sleep is not None else time.sleep
        self._jitter = jitter if jitter is not None else random.random

    def request(self, text: str, image_b64: str | None = None,
                image_media_type: str | None = None) -> ChatRequest:
        """Single-turn user request; temperature is pinned to 0."""
        message = ChatMessage("user", text, image_b64, image_media_type)
        return ChatRequest(self.provider, self.model, (message,),
                           max_tokens=self.max_tokens, temperature=0.0)

    def chat(self, request: ChatRequest) -> str:
        h = request.request_hash
        if self.mode == "replay":
            cached = self.cache.get(h)
            if cached is None:
                raise CacheMiss(f"no recorded response for {h[:16]}…")
            return cached
        if self.mode == "record":
            cached = self.cache.get(h)
            if cached is not None:
                return cached
        text = self._call(request)
        if self.mode == "record":
            self.cache.put(request, text)
        return text

    def _call(self, request: ChatRequest) -> str:
        if self.transport is None:
            self.transport = HttpTransport()
        if not self.base_url:
            raise ProviderError(0, f"no base URL for provider {self.provider!r} "
                                   f"(set SLIME_BASE_URL_{self.provider.upper()})")
        url = self.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = request.wire_payload()
        attempt = 0
        while True:
            with self._limiter:
                status, body = self.transport(url, headers, payload)
            if status == 200:
                return _parse_completion(body)
            if _retryable(status) and attempt < self.max_retries:
                delay = self.backoff_base * (2 ** attempt) * (0.5 + 0.5 * self._jitter())
                self._sleep(delay)
                attempt += 1
                continue
            raise ProviderError(status, body)


def _parse_completion(body: str) -> str:
    try:
        doc = json.loads(body)
        content = doc["choices"][0]["message"]["content"]
    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
        raise ParseError(f"unparseable completion body: {exc}", raw=body) from exc
    if isinstance(content, list):
        content = "".join(part.get("text", "") for part in content
                          if isinstance(part, dict))
    if not isinstance(content, str) or not content.strip():
        raise ParseError("empty completion content", raw=body)
    return content


# --- attack-facing operations ---------------------------------------------------------

_NUMBERED_RE = re.compile(r"^\s*\d+\s*[.)]\s*(.+?)\s*$")


def parse_numbered_list(text: str) -> list[str]:
    items = []
    for line in text.splitlines():
        m = _NUMBERED_RE.match(line)
        if m and m.group(1):
            items.append(m.group(1))
    return items


def generate_captions_from_tags(tags, client: ChatClient,
                                n_captions: int = 5) -> list[str]:
    """Reconstruct n_captions candidate captions from retrieved tags."""
    tags = [str(t).strip() for t in tags if str(t).strip()]
    if not tags:
        raise NoInputs("generate_captions_from_tags requires at least one tag")
    if n_captions < 1:
        raise ValueError("n_captions must be >= 1")
    _, body = load_template("captions_from_tags")
    prompt = body.format(tags=", ".join(tags), n=n_captions)
    raw = client.chat(client.request(prompt))
    captions = parse_numbered_list(raw)
    if len(captions) < n_captions:
        raise ParseError(
            f"expected {n_captions} numbered captions, parsed {len(captions)}",
            raw=raw,
        )
    return captions[:n_captions]


@dataclass
class SceneInputs:
    tags: list | None = None
    captions: list | None = None
    image_path: str | None = None

    def modalities(self) -> list[str]:
        present = []
        if self.tags:
            present.append("tags")
        if self.captions:
            present.append("captions")
        if self.image_path:
            present.append("image")
        return present


def _image_payload(path: str) -> tuple[str, str]:
    p = Path(path)
    media = _MEDIA_TYPES.get(p.suffix.lower(), "application/octet-stream")
    return base64.b64encode(p.read_bytes()).decode("ascii"), media


def _strip_fences(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        text = re.sub(r"^```[a-zA-Z]*\s*", "", text)
        text = re.sub(r"\s*```$", "", text)
    return text.strip()


def extract_scene(inputs: SceneInputs, client: ChatClient) -> StructuredScene:
    """Constrained JSON scene extraction from any mix of tags/captions/image.

    Predicates outside the fixed vocabulary are dropped (counted on the
    returned scene); confidences are clamped to [0, 1].
    """
    present = inputs.modalities()
    if not present:
        raise NoInputs("extract_scene requires tags, captions, or an image")
    sections = []
    if inputs.tags:
        sections.append("Retrieved semantic tags:\n" +
                        ", ".join(str(t) for t in inputs.tags))
    if inputs.captions:
        sections.append("Candidate captions:\n" +
                        "\n".join(f"- {c}" for c in inputs.captions))
    if inputs.image_path:
        sections.append("An image of the scene is attached.")
    _, body = load_template("scene_from_context")
    prompt = body.format(context="\n\n".join(sections))
    if inputs.image_path:
        b64, media = _image_payload(inputs.image_path)
        request = client.request(prompt, image_b64=b64, image_media_type=media)
    else:
        request = client.request(prompt)
    raw = client.chat(request)
    try:
        doc = json.loads(_strip_fences(raw))
        objects = [str(o) for o in doc.get("objects", [])]
        raw_relations = [tuple(rel) for rel in doc.get("relations", [])]
        scenes = []
        for entry in doc.get("scenes", []):
            if isinstance(entry, dict):
                scenes.append((str(entry["label"]), float(entry.get("confidence", 1.0))))
            else:
                label, conf = entry[0], (entry[1] if len(entry) > 1 else 1.0)
                scenes.append((str(label), float(conf)))
    except (json.JSONDecodeError, KeyError, IndexError, TypeError, ValueError) as exc:
        raise ParseError(f"unparseable scene JSON: {exc}", raw=raw) from exc
    dropped = 0
    relations = []
    for rel in raw_relations:
        if len(rel) != 3 or str(rel[1]).strip().lower() not in PREDICATES:
            dropped += 1
            continue
        relations.append((str(rel[0]), str(rel[1]).strip().lower(), str(rel[2])))
    scene = StructuredScene(objects=set(objects), relations=set(relations),
                            scenes=scenes)
    scene.dropped_predicates = dropped
    return scene


def generate_captions_from_scene(client: ChatClient, objects=None, relations=None,
                                 scenes=None, n_captions: int = 5) -> list[str]:
    """Regenerate captions from chosen parts of a structured scene."""
    sections = []
    if objects:
        sections.append("Objects: " + ", ".join(sorted(objects)))
    if relations:
        rels = sorted(relations)
        sections.append("Relations:\n" +
                        "\n".join(f"- {s} {p} {o}" for s, p, o in rels))
    if scenes:
        sections.append("Scene types: " +
                        ", ".join(f"{label} ({conf:.2f})" for label, conf in scenes))
    if not sections:
        raise NoInputs("need at least one of objects/relations/scenes")
    _, body = load_template("captions_from_scene")
    prompt = body.format(context="\n\n".join(sections), n=n_captions)
    raw = client.chat(client.request(prompt))
    captions = parse_numbered_list(raw)
    if len(captions) < n_captions:
        raise ParseError(
            f"expected {n_captions} numbered captions, parsed {len(captions)}",
            raw=raw,
        )
    return captions[:n_captions]


def prompt_template_ids() -> list[str]:
    return [load_template(n)[0] for n in
            ("captions_from_tags", "scene_from_context", "captions_from_scene")]
