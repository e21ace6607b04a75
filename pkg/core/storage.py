import core
import os
import json
import yaml

_extensions = {
    "json": ".json",
    "yaml": ".yml",
}

def detect_type(path: str):
    """guess the storage format from a file extension. defaults to json."""
    ext = os.path.splitext(path)[1].lower()
    if ext in (".yml", ".yaml"):
        return "yaml"
    return "json"

class StorageDict(dict):
    """subclassed dict that handles storage of data. supports json and yaml."""
    def __init__(self, file_path, type: str = None, data_dir=None, autoload=True, create=False, *args):
        super().__init__(*args)

        # lets not overwrite a builtin
        file_type = type
        if not file_type:
            file_type = detect_type(file_path)
        if file_type not in _extensions:
            raise ValueError(f"unsupported storage type: {file_type}")

        if os.path.isabs(file_path) or data_dir is None:
            path = core.resolve_path(file_path)
        else:
            # relative to the project root, like the default config folder
            path = os.path.join(core.get_path(data_dir), file_path)

        if not os.path.splitext(path)[1]:
            path += _extensions[file_type]

        self.path = path
        self.name = os.path.basename(self.path)
        self.type = file_type

        if autoload and os.path.exists(self.path):
            self.load()
        elif create:
            self.save()

    def _write(self, content):
        folder = os.path.dirname(self.path)
        if folder and not os.path.exists(folder):
            os.makedirs(folder, exist_ok=True)

        with open(self.path, "w") as f:
            f.write(content)

        return True

    def _read(self):
        with open(self.path, "r") as f:
            return f.read()

    def dumps(self):
        match self.type:
            case "json":
                return json.dumps(dict(self), indent=1, allow_nan=False)
            case "yaml":
                return yaml.safe_dump(dict(self), default_flow_style=False, sort_keys=False)

    def save(self):
        """save content to file"""
        try:
            return self._write(self.dumps())
        except (OSError, TypeError, ValueError) as e:
            core.log("error", f"error writing {self.name}: {e}")
            raise

    def load(self, data=None):
        """load content from file or data argument"""
        self.clear()

        if data:
            self.update(data)
            return True

        raw = self._read()
        if not raw:
            return None

        match self.type:
            case "json":
                parsed = json.loads(raw)
            case "yaml":
                parsed = yaml.safe_load(raw)

        if not isinstance(parsed, dict):
            raise ValueError(f"{self.name} does not contain a mapping")
        self.update(parsed)

        return True
