"""HTTP client for the optimization service.

By default the client mounts the app in-process over ASGI, so CLI usage
needs no running server; pass a base URL to talk to a remote instance.
"""

from __future__ import annotations

import time
from typing import Any

import httpx

from .case import HensError


class ServiceError(HensError):
    def __init__(self, status_code: int, detail: str):
        super().__init__(f"service error {status_code}: {detail}")
        self.status_code = status_code
        self.detail = detail


class HensClient:
    def __init__(self, server: str | None = None, timeout: float | None = None):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=timeout)
        else:
            from .service.app import create_app

            self._client = httpx.Client(
                transport=httpx.ASGITransport(app=create_app()),
                base_url="http://hens.local",
                timeout=timeout,
            )

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _unwrap(self, resp: httpx.Response) -> dict:
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            raise ServiceError(resp.status_code, str(detail))
        return resp.json()

    def health(self) -> dict:
        return self._unwrap(self._client.get("/health"))

    def validate_case(self, case_text: str) -> dict:
        return self._unwrap(self._client.post("/case/validate", json={"case_text": case_text}))

    def fit(self, case_text: str, seed: int | None = None) -> dict:
        return self._unwrap(self._client.post("/fit", json={"case_text": case_text, "seed": seed}))

    def build(self, case_text: str, fmt: str = "lp", fit_artifact: str | None = None) -> dict:
        return self._unwrap(self._client.post(
            "/build", json={"case_text": case_text, "format": fmt, "fit_artifact": fit_artifact},
        ))

    def report(self, case_text: str, design: dict, trace_csv: str | None = None) -> dict:
        return self._unwrap(self._client.post(
            "/report", json={"case_text": case_text, "design": design, "trace_csv": trace_csv},
        ))

    def submit(self, kind: str, case_text: str, overrides: dict[str, Any] | None = None,
               fit_artifact: str | None = None) -> str:
        payload = {"case_text": case_text, "overrides": overrides or {}, "fit_artifact": fit_artifact}
        info = self._unwrap(self._client.post(f"/{kind}", json=payload))
        return info["job_id"]

    def job_state(self, job_id: str) -> dict:
        return self._unwrap(self._client.get(f"/jobs/{job_id}"))

    def job_result(self, job_id: str) -> dict:
        return self._unwrap(self._client.get(f"/jobs/{job_id}/result"))

    def wait(self, job_id: str, poll_s: float = 1.0, progress=None) -> dict:
        """Poll until the job leaves the queue, then fetch its result."""
        while True:
            info = self.job_state(job_id)
            if progress:
                progress(info)
            if info["state"] == "done":
                return self.job_result(job_id)
            if info["state"] in ("error", "cancelled"):
                raise ServiceError(500, info.get("detail") or f"job {info['state']}")
            time.sleep(poll_s)
