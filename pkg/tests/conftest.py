import pytest

from trustos.corpus import acme_fixture, build_fixture_files, clean_fixture
from trustos.engine import TrustOs
from trustos.model import Role
from trustos.vault import CredentialVault

TEST_KEY = CredentialVault.generate_key_hex()


@pytest.fixture
def engine():
    eng = TrustOs(store_root=None, vault_key_hex=TEST_KEY, workers=4)
    yield eng
    eng.close()


@pytest.fixture
def workspace(engine):
    ws = engine.create_workspace("test-workspace", "ws_test_0001")
    engine.add_user(ws.workspace_id, "admin", Role.ADMINISTRATOR)
    engine.add_user(ws.workspace_id, "founder", Role.FOUNDER)
    engine.add_user(ws.workspace_id, "auditor", Role.AUDITOR)
    engine.add_user(ws.workspace_id, "viewer", Role.READ_ONLY)
    return ws


@pytest.fixture
def acme_engine():
    """Engine with the acme scenario fully scanned."""
    eng = TrustOs(store_root=None, vault_key_hex=TEST_KEY, workers=4)
    ws = eng.create_workspace("acme", "ws_acme_fin_8821")
    eng.add_user(ws.workspace_id, "admin", Role.ADMINISTRATOR)
    eng.attach_scenario(ws.workspace_id, acme_fixture())
    eng.run_scan(ws.workspace_id)
    yield eng
    eng.close()


@pytest.fixture
def clean_engine():
    eng = TrustOs(store_root=None, vault_key_hex=TEST_KEY, workers=4)
    ws = eng.create_workspace("clean", "ws_clean_0001")
    eng.add_user(ws.workspace_id, "admin", Role.ADMINISTRATOR)
    eng.attach_scenario(ws.workspace_id, clean_fixture())
    eng.run_scan(ws.workspace_id)
    yield eng
    eng.close()


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixtures")
    build_fixture_files(out)
    return out
