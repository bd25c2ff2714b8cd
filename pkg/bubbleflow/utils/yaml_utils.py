import re
from pathlib import Path
from typing import Any

import yaml

_INCLUDE_PATTERN = re.compile(r"^(\s*)(.*?)!include\s+(.+)$", re.MULTILINE)


def _indent(content: str, indentation: str) -> str:
    return "\n".join(indentation + line if line.strip() else line for line in content.splitlines())


def resolve_includes(yaml_content: str, *, base_dir: Path = Path("."), fallback_dir: Path | None = None) -> str:
    """Pre-process YAML content to resolve all !include directives.

    Include paths are looked up relative to `base_dir` first and then `fallback_dir`.
    Merge keys (`<<: !include ...`) are supported, which pyyaml-include does not do,
    see https://github.com/tanbro/pyyaml-include/issues/53 .
    """

    def locate(include_path: str) -> Path:
        candidates = [base_dir / include_path]
        if fallback_dir is not None:
            candidates.append(fallback_dir / include_path)
        for candidate in candidates:
            if candidate.is_file():
                return candidate
        msg = f"!include target not found: {include_path} (searched {', '.join(str(c) for c in candidates)})"
        raise FileNotFoundError(msg)

    def include_replacer(match: re.Match) -> str:
        indentation, prefix, include_path = match.group(1), match.group(2), match.group(3).strip()
        included = locate(include_path).read_text().strip()
        if prefix.strip() == "<<:":
            return indentation + "<<:\n" + _indent(included, indentation + "  ")
        if prefix.strip().endswith(":"):
            return indentation + prefix.strip() + "\n" + _indent(included, indentation + "  ")
        return indentation + prefix + included

    while _INCLUDE_PATTERN.search(yaml_content):
        yaml_content = _INCLUDE_PATTERN.sub(include_replacer, yaml_content)
    return yaml_content


def load_yaml(path: Path, *, fallback_dir: Path | None = None) -> Any:
    """Read a YAML file, resolving includes relative to the file itself."""
    text = resolve_includes(path.read_text(), base_dir=path.parent, fallback_dir=fallback_dir)
    return yaml.safe_load(text)
