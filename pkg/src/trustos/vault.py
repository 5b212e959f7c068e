"""Encrypted credential vault with an ephemeral release scope.

Secrets are sealed with AES-256-GCM under a master key supplied via the
TRUSTOS_VAULT_KEY environment variable (64 hex chars). Plaintext exists only
inside with_ephemeral's dynamic extent and the backing buffer is overwritten
with zeros on scope exit, success or failure. Plaintext never appears in any
persisted row, log line, or error message.

Ciphertext blob layout: key_id (4 bytes) || nonce (12 bytes) || GCM ct+tag.
"""

from __future__ import annotations

import base64
import hashlib
import os
import secrets
from typing import Callable, Optional

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import DecryptFailure, UnknownCredential, VaultKeyMissing
from .model import ProviderKind, new_id
from .store import Store

VAULT_KEY_ENV = "TRUSTOS_VAULT_KEY"
_NONCE_LEN = 12
_KEY_ID_LEN = 4


def _zeroize(buf: bytearray):
    for i in range(len(buf)):
        buf[i] = 0


class EphemeralSecret:
    """Scope-bound plaintext. No serialization or display of the content;
    the buffer is zeroized when the owning scope exits."""

    __slots__ = ("_buf", "issued_at")

    def __init__(self, buf: bytearray, issued_at):
        self._buf = buf
        self.issued_at = issued_at

    def reveal_text(self) -> str:
        """Decode the live buffer for immediate use inside the probe scope."""
        return self._buf.decode("utf-8")

    def buffer_is_zeroed(self) -> bool:
        return all(b == 0 for b in self._buf)

    def __repr__(self):
        return "EphemeralSecret(<redacted>)"

    def __str__(self):
        return "<redacted>"


class CredentialVault:
    def __init__(self, store: Store, master_key_hex: Optional[str] = None,
                 clock=None):
        from .model import utc_now
        self._store = store
        self._clock = clock or utc_now
        key_hex = master_key_hex if master_key_hex is not None \
            else os.environ.get(VAULT_KEY_ENV, "")
        self._key = bytes.fromhex(key_hex) if key_hex else None
        if self._key is not None and len(self._key) != 32:
            raise VaultKeyMissing("master key must be 32 bytes (64 hex chars)")
        self._key_id = hashlib.sha256(self._key).digest()[:_KEY_ID_LEN] \
            if self._key else b""

    @staticmethod
    def generate_key_hex() -> str:
        return secrets.token_bytes(32).hex()

    def _require_key(self) -> bytes:
        if self._key is None:
            raise VaultKeyMissing(f"{VAULT_KEY_ENV} is not configured")
        return self._key

    def store(self, workspace_id: str, provider_kind: ProviderKind,
              plaintext_secret) -> str:
        """Seal a secret; the plaintext working buffer is zeroized before
        return. Accepts str/bytes/bytearray; bytearray inputs are wiped
        in place."""
        key = self._require_key()
        self._store.require_workspace(workspace_id)
        if isinstance(plaintext_secret, str):
            buf = bytearray(plaintext_secret.encode("utf-8"))
        elif isinstance(plaintext_secret, bytearray):
            buf = plaintext_secret
        else:
            buf = bytearray(plaintext_secret)
        try:
            nonce = secrets.token_bytes(_NONCE_LEN)
            sealed = AESGCM(key).encrypt(nonce, bytes(buf), None)
        finally:
            _zeroize(buf)
        ref = new_id("cred")
        self._store.append("credentials", {
            "credential_ref": ref,
            "workspace_id": workspace_id,
            "provider_kind": provider_kind.value,
            "blob": base64.b64encode(self._key_id + nonce + sealed).decode("ascii"),
        })
        return ref

    def _lookup(self, credential_ref: str) -> dict:
        for ws in self._store.workspaces():
            rows = self._store.scoped_query(
                ws.workspace_id, "credentials",
                lambda r: r["credential_ref"] == credential_ref)
            if rows:
                return rows[-1]
        raise UnknownCredential(credential_ref)

    def with_ephemeral(self, credential_ref: str,
                       probe_scope: Callable[[EphemeralSecret], object]):
        """Decrypt, hand the secret to probe_scope, and zeroize the buffer on
        the way out regardless of outcome. Decryption and zeroization are
        recorded as activity events (without plaintext)."""
        key = self._require_key()
        row = self._lookup(credential_ref)
        workspace_id = row["workspace_id"]
        blob = base64.b64decode(row["blob"])
        nonce = blob[_KEY_ID_LEN:_KEY_ID_LEN + _NONCE_LEN]
        sealed = blob[_KEY_ID_LEN + _NONCE_LEN:]
        try:
            plain = AESGCM(key).decrypt(nonce, sealed, None)
        except InvalidTag as exc:
            raise DecryptFailure(credential_ref) from exc
        buf = bytearray(plain)
        secret = EphemeralSecret(buf, self._clock())
        self._store.record_event(workspace_id, "probe-worker",
                                 "credential_decrypted",
                                 f"credential:{credential_ref}")
        try:
            return probe_scope(secret)
        finally:
            _zeroize(buf)
            self._store.record_event(workspace_id, "probe-worker",
                                     "credential_zeroized",
                                     f"credential:{credential_ref}")
