import core
import modules
import os
import asyncio
import concurrent.futures
import pandas as pd

class Manager:
    """loads the experiment modules, dispatches commands and runs trials"""

    def __init__(self, config: core.config.ExperimentConfig):
        self.config = config
        self.modules = {}

    def load_modules(self):
        for module in modules.get_all():
            name = core.module.get_name(module)
            if name not in self.modules:
                self.modules[name] = module(self)
        core.log("core", f"modules loaded: {', '.join(self.modules.keys())}")
        return self.modules

    async def start(self):
        if not self.modules:
            self.load_modules()
        for module in self.modules.values():
            await module.on_ready()

    def has_command(self, name: str) -> bool:
        return core.module.find_command(name) is not None

    async def run_command(self, name: str, args=None):
        """find the module that registered `name` and run it. returns a result dict."""
        cmd = name.lower().strip()
        if cmd == "help":
            return {"status": "success", "content": core.commands.get_help(self)}

        found = core.module.find_command(cmd)
        if found is not None:
            for module in self.modules.values():
                if isinstance(module, found.owner):
                    return await found.func(module, args or [])

        return {"status": "error", "content": f"unknown command {name!r}\n\n{core.commands.get_help(self)}"}

    # --- trials ---

    def trial_seed(self, trial: int):
        """per-trial root seed, independent of how many trials run"""
        return core.rng.child(self.config.seed, "trial", trial)

    async def map_trials(self, fn, *args, trials: int = None):
        """run fn(trial, seed, *args) for every trial on the worker pool, results in trial order"""
        trials = trials or self.config["trials"]
        loop = asyncio.get_running_loop()
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.config["threads"]) as pool:
            tasks = [
                loop.run_in_executor(pool, fn, trial, self.trial_seed(trial), *args)
                for trial in range(trials)
            ]
            return await asyncio.gather(*tasks)

    # --- output ---

    def out_path(self, *parts) -> str:
        folder = core.resolve_path(self.config["out"])
        os.makedirs(folder, exist_ok=True)
        return os.path.join(folder, *parts)

    def write_csv(self, name: str, rows, columns, sort_by=None) -> str:
        """fixed header, rows sorted before writing so reruns are byte-identical"""
        frame = pd.DataFrame(list(rows), columns=list(columns))
        if sort_by and not frame.empty:
            frame = frame.sort_values(list(sort_by), kind="mergesort").reset_index(drop=True)
        path = self.out_path(name)
        frame.to_csv(path, index=False)
        core.log("core", f"wrote {len(frame)} rows to {path}")
        return path
