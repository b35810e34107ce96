import json
import urllib.error
import urllib.request

import numpy as np
import pytest

from carpetlab.raster import read_png
from carpetlab.service import (RequestValidationError, ServiceConfig,
                               load_config, parse_config_file,
                               parse_tile_request)
from carpetlab.util import format_complex


def get(url):
    with urllib.request.urlopen(url, timeout=30) as resp:
        return resp.status, dict(resp.headers), resp.read()


def get_error(url):
    try:
        with urllib.request.urlopen(url, timeout=30) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as err:
        return err.code, err.read()


def post_json(url, doc):
    req = urllib.request.Request(url, data=json.dumps(doc).encode(),
                                 headers={"Content-Type": "application/json"},
                                 method="POST")
    try:
        with urllib.request.urlopen(req, timeout=120) as resp:
            return resp.status, dict(resp.headers), json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, dict(err.headers), json.loads(err.read())


class TestConfig:
    def test_precedence_env_over_file_over_defaults(self, tmp_path):
        cfg_file = tmp_path / "svc.cfg"
        cfg_file.write_text("port = 1234\ncache_dir = /from/file  # comment\n")
        cfg = load_config(str(cfg_file), env={"CARPETLAB_PORT": "5678"})
        assert cfg.port == 5678            # env wins over file
        assert cfg.cache_dir == "/from/file"
        assert cfg.n_max_classify == 1000  # default

    def test_overrides_beat_env(self, tmp_path):
        cfg = load_config(None, env={"CARPETLAB_PORT": "5678"}, port=99)
        assert cfg.port == 99

    def test_unknown_key_rejected(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("no_such_key = 1\n")
        with pytest.raises(ValueError):
            parse_config_file(str(bad))

    def test_malformed_line_rejected(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("just some words\n")
        with pytest.raises(ValueError):
            parse_config_file(str(bad))


class TestTileRequestParsing:
    def test_defaults(self):
        req = parse_tile_request({}, ServiceConfig())
        assert req.plane == "parameter"
        assert req.size == 256
        assert req.coloring == "classification"
        assert req.n_max == 1000

    def test_dynamical_needs_lambda(self):
        with pytest.raises(RequestValidationError) as err:
            parse_tile_request({"plane": ["dynamical"]}, ServiceConfig())
        assert "lambda" in err.value.field_errors

    def test_dynamical_rejects_classification_coloring(self):
        with pytest.raises(RequestValidationError):
            parse_tile_request({"plane": ["dynamical"], "lambda": ["1+0i"],
                                "coloring": ["classification"]}, ServiceConfig())

    def test_bad_size(self):
        with pytest.raises(RequestValidationError) as err:
            parse_tile_request({"size": ["300"]}, ServiceConfig())
        assert "size" in err.value.field_errors

    def test_digest_is_canonical(self):
        a = parse_tile_request({"cx": ["0.5"], "size": ["128"]}, ServiceConfig())
        b = parse_tile_request({"size": ["128"], "cx": ["0.5"]}, ServiceConfig())
        assert a.digest() == b.digest()


class TestTileEndpoint:
    def test_deterministic_and_cached(self, atlas_server):
        base, _ = atlas_server
        url = f"{base}/tile?plane=parameter&n=3&cx=0&cy=0&scale=0.6&size=128&n_max=150"
        s1, h1, b1 = get(url)
        s2, h2, b2 = get(url)
        assert s1 == s2 == 200
        assert h1["X-Cache"] == "miss"
        assert h2["X-Cache"] == "hit"
        assert h1["X-Input-Digest"] == h2["X-Input-Digest"]
        assert b1 == b2
        assert b1[:8] == b"\x89PNG\r\n\x1a\n"

    def test_dynamical_tile(self, atlas_server):
        base, _ = atlas_server
        s, h, b = get(f"{base}/tile?plane=dynamical&n=3&lambda=1+0i"
                      f"&cx=0&cy=0&scale=4&size=128&n_max=60")
        assert s == 200
        img = read_png(b)
        assert img.shape == (128, 128, 3)

    def test_conjugate_center_mirrors_tile(self, atlas_server):
        base, _ = atlas_server
        q = "plane=parameter&n=3&scale=0.3&size=128&n_max=120&cx=0.1"
        _, _, b1 = get(f"{base}/tile?{q}&cy=0.05")
        _, _, b2 = get(f"{base}/tile?{q}&cy=-0.05")
        img1 = read_png(b1)
        img2 = read_png(b2)
        assert np.array_equal(img2, img1[::-1])

    def test_malformed_request_gives_field_diagnostics(self, atlas_server):
        base, _ = atlas_server
        status, body = get_error(f"{base}/tile?size=999&scale=-1")
        assert status == 400
        doc = json.loads(body)
        assert "size" in doc["fields"] and "scale" in doc["fields"]

    def test_budget_exceeded_gives_429(self, atlas_server):
        base, server = atlas_server
        old = server.service.config
        server.service.config = ServiceConfig(cache_dir=old.cache_dir,
                                              work_budget=1000)
        try:
            status, body = get_error(
                f"{base}/tile?plane=parameter&size=512&n_max=1000")
            assert status == 429
            doc = json.loads(body)
            assert doc["required"] > doc["budget"]
        finally:
            server.service.config = old

    def test_unknown_endpoint_404(self, atlas_server):
        base, _ = atlas_server
        status, _ = get_error(f"{base}/nope")
        assert status == 404

    def test_parameter_tile_contains_all_classes(self, atlas_server):
        # the default window over the parameter plane shows the Cantor
        # locus, the ring structure around the puncture, non-escape zones,
        # and at least one Sierpinski hole
        base, _ = atlas_server
        _, _, b = get(f"{base}/tile?plane=parameter&n=3&cx=0&cy=0"
                      f"&scale=0.6&size=256&n_max=300")
        img = read_png(b)
        colors = {tuple(c) for c in img.reshape(-1, 3)}
        assert (0x40, 0x40, 0x40) in colors        # Cantor
        assert (0x1F, 0x77, 0xB4) in colors        # CantorCircles
        assert (0x00, 0x00, 0x00) in colors        # NonEscaping
        from carpetlab.palette import carpet_color
        assert any(carpet_color(k) in colors for k in range(3, 30))


class TestClassifyEndpoint:
    def test_basic_report(self, atlas_server):
        base, _ = atlas_server
        s, h, b = get(f"{base}/classify?n=3&lambda=1+0i")
        assert s == 200
        doc = json.loads(b)
        assert doc["tag"] == "Cantor"
        assert doc["k"] == 0
        assert doc["stable"] is True
        assert {"R", "rho", "n_max", "escape_index", "min_central_index",
                "input_digest"} <= set(doc)

    def test_tiny_lambda(self, atlas_server):
        base, _ = atlas_server
        _, _, b = get(f"{base}/classify?n=3&lambda=1e-8+0i")
        doc = json.loads(b)
        assert doc["tag"] == "CantorCircles"
        assert doc["k"] == 2

    def test_zero_lambda_rejected(self, atlas_server):
        base, _ = atlas_server
        status, body = get_error(f"{base}/classify?n=3&lambda=0+0i")
        assert status == 400
        assert "lambda" in json.loads(body)["fields"]

    def test_missing_lambda_rejected(self, atlas_server):
        base, _ = atlas_server
        status, _ = get_error(f"{base}/classify?n=3")
        assert status == 400


class TestSurveyEndpoints:
    def test_survey_roundtrip_and_resume(self, atlas_server):
        base, _ = atlas_server
        body = {"region": [-0.3, -0.3, 0.3, 0.3], "grid": [8, 8],
                "n": 3, "n_max": 120}
        s1, h1, doc1 = post_json(f"{base}/survey", body)
        assert s1 == 200
        assert h1["X-Cache"] == "miss"
        assert doc1["histogram"]
        total = (doc1["histogram"]["Cantor"] + doc1["histogram"]["CantorCircles"]
                 + doc1["histogram"]["NonEscaping"]
                 + doc1["histogram"]["Undetermined"]
                 + sum(doc1["histogram"]["Carpet"].values()))
        assert total == 64

        s2, h2, doc2 = post_json(f"{base}/survey", body)
        assert h2["X-Cache"] == "hit"
        assert doc2 == doc1

        status, _, raw = get(f"{base}/survey/{doc1['input_digest']}")
        assert status == 200
        assert json.loads(raw) == doc1

    def test_survey_cells_agree_with_classify(self, atlas_server):
        base, _ = atlas_server
        region = [-0.3, -0.3, 0.3, 0.3]
        _, _, doc = post_json(f"{base}/survey",
                              {"region": region, "grid": [5, 5], "n": 3,
                               "n_max": 150})
        gx, gy = doc["grid"]
        for iy in range(gy):
            for ix in range(gx):
                x = region[0] + (ix + 0.5) * (region[2] - region[0]) / gx
                y = region[1] + (iy + 0.5) * (region[3] - region[1]) / gy
                if complex(x, y) == 0:
                    # the puncture: classify rejects it, the survey flags it
                    assert doc["tags"][iy][ix] == -2
                    continue
                lam = format_complex(complex(x, y))
                _, _, raw = get(f"{base}/classify?n=3&lambda={lam}&n_max=150")
                report = json.loads(raw)
                code = doc["tags"][iy][ix]
                tag = {0: "Cantor", 2: "CantorCircles", -1: "NonEscaping",
                       -2: "Undetermined"}.get(code, "Carpet")
                assert report["tag"] == tag
                if code >= 3:
                    assert report["k"] == code

    def test_zero_area_region_single_cell_matches_classify(self, atlas_server):
        base, _ = atlas_server
        _, _, doc = post_json(f"{base}/survey",
                              {"region": [0.2, 0.1, 0.2, 0.1], "grid": [1, 1],
                               "n": 3, "n_max": 150})
        _, _, raw = get(f"{base}/classify?n=3&lambda=0.2+0.1i&n_max=150")
        report = json.loads(raw)
        code = doc["tags"][0][0]
        if code >= 3:
            assert report["tag"] == "Carpet" and report["k"] == code
        else:
            assert {0: "Cantor", 2: "CantorCircles", -1: "NonEscaping",
                    -2: "Undetermined"}[code] == report["tag"]

    def test_survey_validation(self, atlas_server):
        base, _ = atlas_server
        status, _, doc = post_json(f"{base}/survey", {"region": [0, 0, 1],
                                                      "grid": "x"})
        assert status == 400
        assert "region" in doc["fields"] and "grid" in doc["fields"]

    def test_survey_budget(self, atlas_server):
        base, _ = atlas_server
        status, _, doc = post_json(
            f"{base}/survey",
            {"region": [-1, -1, 1, 1], "grid": [4096, 4096], "n": 3,
             "n_max": 1000})
        assert status == 429

    def test_survey_grid_cap(self, atlas_server):
        base, _ = atlas_server
        status, _, doc = post_json(
            f"{base}/survey",
            {"region": [-1, -1, 1, 1], "grid": [5000, 1], "n": 3, "n_max": 10})
        assert status == 400

    def test_missing_survey_404(self, atlas_server):
        base, _ = atlas_server
        status, _ = get_error(f"{base}/survey/deadbeef")
        assert status == 404


class TestCacheAudit:
    def test_audit_recomputes_every_nth_hit(self, tmp_path):
        from carpetlab.service import AtlasService

        config = load_config(None, env={}, cache_dir=str(tmp_path / "c"),
                             audit_every=2, n_max_classify=100)
        svc = AtlasService(config)
        req = parse_tile_request({"size": ["128"], "n_max": ["50"]}, config)
        _, _, status0 = svc.handle_tile(req)
        assert status0 == "miss"
        # corrupt the cached tile; the second hit is audited and repaired
        path = svc.cache._tile_path(req.digest())
        good = path and open(path, "rb").read()
        with open(path, "wb") as fh:
            fh.write(b"corrupt")
        _, _, s1 = svc.handle_tile(req)
        assert s1 == "hit"  # first hit is not audited
        data, _, s2 = svc.handle_tile(req)
        assert s2 == "miss"  # audit caught the corruption and re-rendered
        assert svc.audit_mismatches == 1
        assert data == good
