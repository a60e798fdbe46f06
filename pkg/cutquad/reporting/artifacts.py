"""Output directory layout and the manifest listing every emitted artifact."""
import json
import logging
import os
from dataclasses import dataclass, field
from typing import List

from cutquad.errors import ArgumentError

logger = logging.getLogger(__name__)

ARTIFACT_KINDS = ("csv", "json", "svg", "html", "yaml")
MANIFEST_NAME = "manifest.json"
SUBDIRS = ("csv", "plots", "summary")


@dataclass(frozen=True)
class ArtifactEntry:
    path: str
    kind: str
    size: int
    command: str


@dataclass
class ArtifactManifest:
    output_dir: str
    entries: List[ArtifactEntry] = field(default_factory=list)

    @classmethod
    def open(cls, output_dir: str) -> "ArtifactManifest":
        """Continue the manifest already in output_dir, keeping entries whose files still exist."""
        manifest = cls(output_dir)
        file_path = os.path.join(output_dir, MANIFEST_NAME)
        if os.path.exists(file_path):
            for item in read_manifest(output_dir).get("artifacts", []):
                if os.path.isfile(os.path.join(output_dir, item["path"])):
                    manifest.entries.append(ArtifactEntry(item["path"], item["kind"], item["bytes"], item["command"]))
        return manifest

    def subdir(self, name: str) -> str:
        if name not in SUBDIRS:
            raise ArgumentError(f"Unknown artifact directory {name}; expected one of {', '.join(SUBDIRS)}")
        directory = os.path.join(self.output_dir, name)
        os.makedirs(directory, exist_ok=True)
        return directory

    def add(self, path: str, kind: str, command: str) -> ArtifactEntry:
        """Register a written file; the byte size is taken now."""
        if kind not in ARTIFACT_KINDS:
            raise ArgumentError(f"Unknown artifact kind {kind}")
        if not os.path.isfile(path):
            raise FileNotFoundError(f"The file {path} does not exist.")
        size = os.path.getsize(path)
        if size == 0:
            raise ArgumentError(f"Artifact {path} is empty")
        relative = os.path.relpath(path, self.output_dir).replace(os.sep, "/")
        entry = ArtifactEntry(relative, kind, size, command)
        self.entries = [e for e in self.entries if e.path != relative] + [entry]
        logger.debug("Artifact %s (%s, %d bytes)", relative, kind, size)
        return entry

    def paths(self, kind: str = None) -> List[str]:
        return [e.path for e in self.entries if kind is None or e.kind == kind]

    def to_dict(self) -> dict:
        return {
            "output_dir": self.output_dir.replace(os.sep, "/"),
            "artifacts": [
                {"path": e.path, "kind": e.kind, "bytes": e.size, "command": e.command}
                for e in self.entries
            ],
        }


def write_manifest(manifest: ArtifactManifest) -> str:
    os.makedirs(manifest.output_dir, exist_ok=True)
    file_path = os.path.join(manifest.output_dir, MANIFEST_NAME)
    with open(file_path, "w", newline="\n") as file:
        json.dump(manifest.to_dict(), file, indent=2)
        file.write("\n")
    logger.info("Wrote manifest with %d artifacts to %s", len(manifest.entries), file_path)
    return file_path


def read_manifest(output_dir: str) -> dict:
    file_path = os.path.join(output_dir, MANIFEST_NAME)
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"The file {file_path} does not exist.")
    with open(file_path, "r") as file:
        return json.load(file)
