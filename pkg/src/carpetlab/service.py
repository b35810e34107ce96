"""Networked atlas service: tile rendering, classification, surveys.

Endpoints (all computation is deterministic for a given request):

    GET  /tile?plane=parameter&n=3&cx=0&cy=0&scale=0.6&size=256&...
         -> image/png, headers X-Cache: hit|miss and X-Input-Digest
    GET  /classify?n=3&lambda=1+0i[&n_max=...]   -> application/json
    POST /survey   {"region": [x0,y0,x1,y1], "grid": [gx,gy], "n": 3, ...}
    GET  /survey/<digest>                        -> persisted survey JSON

Configuration precedence: CLI overrides > CARPETLAB_* environment
variables > config file (key = value lines, # comments) > built-in
defaults.  Tiles are cached content-addressed under the cache directory
(digest of the canonical request JSON) and published atomically via
write-then-rename; every Nth cache hit is audited against a fresh render.

A fractal renderer is a CPU-DoS magnet, so each request is budgeted by its
pixel * iteration product before any computation starts (429 on excess).
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, fields as dataclass_fields, replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlparse

from . import fields, palette
from .dynamics import InvalidParameterError, McMullen, classify_parameter
from .raster import png_bytes
from .util import canonical_json, digest_json, parse_complex

TILE_SIZES = (128, 256, 512)
MAX_SURVEY_GRID = 4096


def _complex_param(raw: str) -> complex:
    """Parse an a+bi query value; a '+' decoded as a space is restored.

    Complex literals contain no spaces, so clients may send lambda=1+0i
    without percent-encoding the plus.
    """
    return parse_complex(raw.replace(" ", "+"))


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    cache_dir: str = "./carpetlab-cache"
    work_budget: int = 2_000_000_000  # pixel * iteration cap per request
    n_max_classify: int = 1000
    n_max_escape: int = 100
    audit_every: int = 32  # audit every Nth cache hit (0 disables)
    threads: int = 1


_INT_KEYS = {"port", "work_budget", "n_max_classify", "n_max_escape",
             "audit_every", "threads"}


def parse_config_file(path: str) -> dict:
    values: dict = {}
    known = {f.name for f in dataclass_fields(ServiceConfig)}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = int(value) if key in _INT_KEYS else value
    return values


def load_config(config_path: Optional[str] = None, env: Optional[dict] = None,
                **overrides) -> ServiceConfig:
    """Defaults, then config file, then CARPETLAB_* env, then overrides."""
    env = os.environ if env is None else env
    cfg = ServiceConfig()
    if config_path:
        cfg = replace(cfg, **parse_config_file(config_path))
    env_values = {}
    for f in dataclass_fields(ServiceConfig):
        key = f"CARPETLAB_{f.name.upper()}"
        if key in env:
            raw = env[key]
            env_values[f.name] = int(raw) if f.name in _INT_KEYS else raw
    if env_values:
        cfg = replace(cfg, **env_values)
    clean = {k: v for k, v in overrides.items() if v is not None}
    if clean:
        cfg = replace(cfg, **clean)
    return cfg


# ---------------------------------------------------------------------------
# Requests
# ---------------------------------------------------------------------------

class RequestValidationError(ValueError):
    def __init__(self, field_errors: dict):
        super().__init__(f"invalid request: {field_errors}")
        self.field_errors = field_errors


class BudgetExceededError(RuntimeError):
    def __init__(self, cost: int, budget: int):
        super().__init__(f"work budget exceeded: needs {cost}, cap {budget}")
        self.cost = cost
        self.budget = budget


@dataclass(frozen=True)
class TileRequest:
    plane: str  # "parameter" | "dynamical"
    n: int
    lam: Optional[complex]  # dynamical plane only
    cx: float
    cy: float
    scale: float
    size: int
    n_max: int
    coloring: str  # "classification" | "escape_time"

    def normalized(self) -> dict:
        doc = {
            "plane": self.plane,
            "n": self.n,
            "center": [self.cx, self.cy],
            "scale": self.scale,
            "size": self.size,
            "n_max": self.n_max,
            "coloring": self.coloring,
        }
        if self.plane == "dynamical":
            doc["lambda"] = [self.lam.real, self.lam.imag]
        return doc

    def digest(self) -> str:
        return digest_json(self.normalized())

    def cost(self) -> int:
        stability = 2 if self.coloring == "classification" else 1
        return self.size * self.size * self.n_max * stability


def parse_tile_request(params: dict, config: ServiceConfig) -> TileRequest:
    errors: dict = {}

    def get(key, default=None):
        vals = params.get(key)
        return vals[0] if vals else default

    plane = get("plane", "parameter")
    if plane not in ("parameter", "dynamical"):
        errors["plane"] = "must be 'parameter' or 'dynamical'"

    def get_int(key, default, minimum=None):
        raw = get(key)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            errors[key] = f"not an integer: {raw!r}"
            return default
        if minimum is not None and value < minimum:
            errors[key] = f"must be >= {minimum}"
        return value

    def get_float(key, default):
        raw = get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            errors[key] = f"not a number: {raw!r}"
            return default

    n = get_int("n", 3, minimum=3)
    size = get_int("size", 256)
    if size not in TILE_SIZES:
        errors["size"] = f"must be one of {TILE_SIZES}"
    cx = get_float("cx", 0.0)
    cy = get_float("cy", 0.0)
    scale = get_float("scale", 4.0)
    if not scale > 0:
        errors["scale"] = "must be > 0"

    coloring = get("coloring")
    lam = None
    if plane == "dynamical":
        raw = get("lambda")
        if raw is None:
            errors["lambda"] = "required for dynamical tiles"
        else:
            try:
                lam = _complex_param(raw)
            except ValueError as exc:
                errors["lambda"] = str(exc)
            if lam == 0:
                errors["lambda"] = "must be nonzero"
        if coloring is None:
            coloring = "escape_time"
        elif coloring != "escape_time":
            errors["coloring"] = "dynamical tiles support only escape_time"
    else:
        if coloring is None:
            coloring = "classification"
        elif coloring not in ("classification", "escape_time"):
            errors["coloring"] = "must be 'classification' or 'escape_time'"

    default_n_max = (config.n_max_classify if coloring == "classification"
                     else config.n_max_escape)
    n_max = get_int("n_max", default_n_max, minimum=1)

    if errors:
        raise RequestValidationError(errors)
    return TileRequest(plane=plane, n=n, lam=lam, cx=cx, cy=cy, scale=scale,
                       size=size, n_max=n_max, coloring=coloring)


# ---------------------------------------------------------------------------
# Tile cache (content-addressed, atomic publication)
# ---------------------------------------------------------------------------

class TileCache:
    def __init__(self, root: str):
        self.root = root
        self.tile_dir = os.path.join(root, "tiles")
        self.survey_dir = os.path.join(root, "surveys")
        os.makedirs(self.tile_dir, exist_ok=True)
        os.makedirs(self.survey_dir, exist_ok=True)
        self._index_lock = threading.Lock()

    def _tile_path(self, digest: str) -> str:
        return os.path.join(self.tile_dir, f"{digest}.png")

    def get_tile(self, digest: str) -> Optional[bytes]:
        try:
            with open(self._tile_path(digest), "rb") as fh:
                return fh.read()
        except FileNotFoundError:
            return None

    def put_tile(self, digest: str, data: bytes, request_json: str) -> None:
        path = self._tile_path(digest)
        tmp = f"{path}.tmp.{os.getpid()}.{threading.get_ident()}"
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
        with self._index_lock:
            with open(os.path.join(self.root, "tiles.index"), "a",
                      encoding="utf-8") as fh:
                fh.write(f"{digest}\t{request_json}\n")

    def _survey_path(self, digest: str) -> str:
        return os.path.join(self.survey_dir, f"{digest}.json")

    def get_survey(self, digest: str) -> Optional[bytes]:
        try:
            with open(self._survey_path(digest), "rb") as fh:
                return fh.read()
        except FileNotFoundError:
            return None

    def put_survey(self, digest: str, data: bytes) -> None:
        path = self._survey_path(digest)
        tmp = f"{path}.tmp.{os.getpid()}.{threading.get_ident()}"
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Service core (transport-independent)
# ---------------------------------------------------------------------------

class AtlasService:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.cache = TileCache(config.cache_dir)
        self._key_locks: dict[str, threading.Lock] = {}
        self._key_locks_guard = threading.Lock()
        self._hit_counter = 0
        self._counter_lock = threading.Lock()
        self.audit_mismatches = 0

    def _lock_for(self, digest: str) -> threading.Lock:
        with self._key_locks_guard:
            return self._key_locks.setdefault(digest, threading.Lock())

    # -- tiles --------------------------------------------------------------

    def render_tile(self, req: TileRequest) -> bytes:
        viewport = fields.viewport_from_center(req.cx, req.cy, req.scale,
                                               req.size, req.size)
        threads = self.config.threads
        if req.plane == "parameter":
            codes, esc = fields.classification_field(
                req.n, viewport, req.size, req.size, req.n_max, threads)
            if req.coloring == "classification":
                rgb = palette.classification_rgb(codes)
            else:
                rgb = palette.escape_rgb(esc, req.n_max)
        else:
            esc = fields.escape_field(McMullen(req.n, req.lam), viewport,
                                      req.size, req.size, req.n_max, threads)
            rgb = palette.escape_rgb(esc, req.n_max)
        return png_bytes(rgb[::-1])  # raster rows are bottom-up; PNG top-down

    def handle_tile(self, req: TileRequest) -> tuple[bytes, str, str]:
        """Returns (png, digest, cache_status)."""
        cost = req.cost()
        if cost > self.config.work_budget:
            raise BudgetExceededError(cost, self.config.work_budget)
        digest = req.digest()
        cached = self.cache.get_tile(digest)
        if cached is not None:
            if self._should_audit():
                fresh = self.render_tile(req)
                if fresh != cached:
                    self.audit_mismatches += 1
                    self.cache.put_tile(digest, fresh,
                                        canonical_json(req.normalized()))
                    return fresh, digest, "miss"
            return cached, digest, "hit"
        with self._lock_for(digest):
            cached = self.cache.get_tile(digest)
            if cached is not None:
                return cached, digest, "hit"
            data = self.render_tile(req)
            self.cache.put_tile(digest, data, canonical_json(req.normalized()))
            return data, digest, "miss"

    def _should_audit(self) -> bool:
        if self.config.audit_every <= 0:
            return False
        with self._counter_lock:
            self._hit_counter += 1
            return self._hit_counter % self.config.audit_every == 0

    # -- classification -----------------------------------------------------

    def handle_classify(self, n: int, lam: complex,
                        n_max: Optional[int] = None) -> dict:
        n_max = self.config.n_max_classify if n_max is None else n_max
        cost = 2 * n_max
        if cost > self.config.work_budget:
            raise BudgetExceededError(cost, self.config.work_budget)
        result = classify_parameter(n, lam, n_max=n_max)
        params = {"n": n, "lambda": [lam.real, lam.imag], "n_max": n_max}
        report = {
            "input_digest": digest_json(params),
            "parameters": params,
            "tag": result.tag,
            "k": result.k,
            "escape_index": result.escape_index,
            "min_central_index": result.min_central_index,
            "R": result.R,
            "rho": result.rho,
            "n_max": result.n_max,
            "steps_computed": result.steps_computed,
            "stable": result.stability.stable if result.stability else None,
            "variant_tags": list(result.stability.variant_tags)
            if result.stability else None,
            "warnings": [],
        }
        return report

    # -- surveys ------------------------------------------------------------

    def handle_survey(self, body: dict) -> tuple[dict, str, bool]:
        """Run (or resume) a survey; returns (doc, digest, was_cached)."""
        errors: dict = {}
        region = body.get("region")
        if (not isinstance(region, list) or len(region) != 4
                or not all(isinstance(v, (int, float)) for v in region)):
            errors["region"] = "must be [x0, y0, x1, y1]"
        else:
            x0, y0, x1, y1 = map(float, region)
            if x1 < x0 or y1 < y0:
                errors["region"] = "needs x1 >= x0 and y1 >= y0"
        grid = body.get("grid", 256)
        if isinstance(grid, int):
            gx = gy = grid
        elif (isinstance(grid, list) and len(grid) == 2
              and all(isinstance(g, int) for g in grid)):
            gx, gy = grid
        else:
            errors["grid"] = "must be an integer or [gx, gy]"
            gx = gy = 0
        if not errors.get("grid") and not (1 <= gx <= MAX_SURVEY_GRID
                                           and 1 <= gy <= MAX_SURVEY_GRID):
            errors["grid"] = f"grid must be within 1..{MAX_SURVEY_GRID} per axis"
        n = body.get("n", 3)
        if not isinstance(n, int) or n < 3:
            errors["n"] = "must be an integer >= 3"
        n_max = body.get("n_max", self.config.n_max_classify)
        if not isinstance(n_max, int) or n_max < 1:
            errors["n_max"] = "must be an integer >= 1"
        if errors:
            raise RequestValidationError(errors)

        cost = gx * gy * n_max * 2
        if cost > self.config.work_budget:
            raise BudgetExceededError(cost, self.config.work_budget)

        params = {"region": [x0, y0, x1, y1], "grid": [gx, gy],
                  "n": n, "n_max": n_max}
        digest = digest_json(params)
        cached = self.cache.get_survey(digest)
        if cached is not None:
            return json.loads(cached), digest, True

        result = fields.run_survey((x0, y0, x1, y1), gx, gy, n, n_max,
                                   self.config.threads)
        doc = {
            "input_digest": digest,
            "parameters": params,
            "grid": [gx, gy],
            "tags": [[int(c) for c in row] for row in result.codes],
            "histogram": result.histogram,
            "warnings": list(result.warnings),
        }
        self.cache.put_survey(digest, canonical_json(doc).encode("utf-8"))
        return doc, digest, False

    def get_survey(self, digest: str) -> Optional[dict]:
        data = self.cache.get_survey(digest)
        return json.loads(data) if data is not None else None


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------

class AtlasHandler(BaseHTTPRequestHandler):
    server_version = "carpetlab-atlas/0.1"
    protocol_version = "HTTP/1.1"

    @property
    def service(self) -> AtlasService:
        return self.server.service  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):  # quiet by default
        if os.environ.get("CARPETLAB_SERVICE_LOG") == "1":
            super().log_message(fmt, *args)

    def _send_json(self, status: int, doc: dict, headers: Optional[dict] = None):
        body = (canonical_json(doc) + "\n").encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        for key, value in (headers or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status: int, message: str, extra: Optional[dict] = None):
        doc = {"error": message}
        if extra:
            doc.update(extra)
        self._send_json(status, doc)

    def do_GET(self):
        url = urlparse(self.path)
        try:
            if url.path == "/tile":
                self._get_tile(parse_qs(url.query))
            elif url.path == "/classify":
                self._get_classify(parse_qs(url.query))
            elif url.path.startswith("/survey/"):
                self._get_survey(url.path[len("/survey/"):])
            else:
                self._send_error_json(404, f"no such endpoint: {url.path}")
        except RequestValidationError as exc:
            self._send_error_json(400, "invalid request",
                                  {"fields": exc.field_errors})
        except BudgetExceededError as exc:
            self._send_error_json(429, "work budget exceeded",
                                  {"required": exc.cost, "budget": exc.budget})
        except InvalidParameterError as exc:
            self._send_error_json(400, str(exc))

    def do_POST(self):
        url = urlparse(self.path)
        try:
            if url.path == "/survey":
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    body = json.loads(self.rfile.read(length) or b"{}")
                except json.JSONDecodeError as exc:
                    self._send_error_json(400, f"invalid JSON body: {exc}")
                    return
                doc, digest, cached = self.service.handle_survey(body)
                self._send_json(200, doc, {
                    "X-Input-Digest": digest,
                    "X-Cache": "hit" if cached else "miss",
                })
            else:
                self._send_error_json(404, f"no such endpoint: {url.path}")
        except RequestValidationError as exc:
            self._send_error_json(400, "invalid request",
                                  {"fields": exc.field_errors})
        except BudgetExceededError as exc:
            self._send_error_json(429, "work budget exceeded",
                                  {"required": exc.cost, "budget": exc.budget})

    def _get_tile(self, params: dict):
        req = parse_tile_request(params, self.service.config)
        data, digest, status = self.service.handle_tile(req)
        self.send_response(200)
        self.send_header("Content-Type", "image/png")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("X-Cache", status)
        self.send_header("X-Input-Digest", digest)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _get_classify(self, params: dict):
        errors: dict = {}
        try:
            n = int(params.get("n", ["3"])[0])
        except ValueError:
            errors["n"] = "not an integer"
            n = 3
        lam = None
        raw = params.get("lambda")
        if not raw:
            errors["lambda"] = "required"
        else:
            try:
                lam = _complex_param(raw[0])
            except ValueError as exc:
                errors["lambda"] = str(exc)
        n_max = None
        if "n_max" in params:
            try:
                n_max = int(params["n_max"][0])
                if n_max < 1:
                    errors["n_max"] = "must be >= 1"
            except ValueError:
                errors["n_max"] = "not an integer"
        if lam is not None and lam == 0:
            errors["lambda"] = "must be nonzero"
        if n < 3:
            errors["n"] = "must be >= 3"
        if errors:
            raise RequestValidationError(errors)
        report = self.service.handle_classify(n, lam, n_max)
        self._send_json(200, report, {"X-Input-Digest": report["input_digest"],
                                      "Access-Control-Allow-Origin": "*"})

    def _get_survey(self, digest: str):
        doc = self.service.get_survey(digest)
        if doc is None:
            self._send_error_json(404, f"no survey with digest {digest}")
            return
        self._send_json(200, doc, {"X-Input-Digest": digest,
                                   "Access-Control-Allow-Origin": "*"})


def make_server(config: ServiceConfig) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((config.host, config.port), AtlasHandler)
    server.service = AtlasService(config)  # type: ignore[attr-defined]
    return server


def serve_forever(config: ServiceConfig) -> None:
    server = make_server(config)
    host, port = server.server_address[:2]
    print(f"carpetlab atlas service listening on http://{host}:{port} "
          f"(cache: {config.cache_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
