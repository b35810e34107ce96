import threading

import pytest

from carpetlab import service


@pytest.fixture()
def atlas_server(tmp_path):
    """A live atlas service on an ephemeral port; yields its base URL."""
    config = service.load_config(
        None, env={}, host="127.0.0.1", port=0,
        cache_dir=str(tmp_path / "cache"), n_max_classify=300, n_max_escape=60)
    server = service.make_server(config)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    try:
        yield f"http://{host}:{port}", server
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)
