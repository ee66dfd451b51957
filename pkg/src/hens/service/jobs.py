"""In-memory job registry running solves on worker threads."""

from __future__ import annotations

import threading
import traceback
import uuid
from dataclasses import dataclass, field
from typing import Any, Callable


@dataclass
class Job:
    job_id: str
    kind: str
    state: str = "queued"  # queued | running | done | error | cancelled
    detail: str = ""
    result: Any = None
    _thread: threading.Thread | None = field(default=None, repr=False)


class JobRegistry:
    def __init__(self):
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, kind: str, fn: Callable[[], Any]) -> Job:
        job = Job(job_id=uuid.uuid4().hex[:12], kind=kind)

        def runner():
            with self._lock:
                if job.state == "cancelled":
                    return
                job.state = "running"
            try:
                result = fn()
            except Exception as exc:  # surface the failure through the API
                with self._lock:
                    job.state = "error"
                    job.detail = f"{type(exc).__name__}: {exc}"
                    job.result = traceback.format_exc()
                return
            with self._lock:
                job.state = "done"
                job.result = result

        thread = threading.Thread(target=runner, name=f"hens-job-{job.job_id}", daemon=True)
        job._thread = thread
        with self._lock:
            self._jobs[job.job_id] = job
        thread.start()
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def cancel(self, job_id: str) -> bool:
        """Best effort: only jobs that have not started can be cancelled."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or job.state != "queued":
                return False
            job.state = "cancelled"
            return True

    def wait(self, job_id: str, timeout: float | None = None) -> Job:
        job = self.get(job_id)
        if job and job._thread:
            job._thread.join(timeout)
        return job
