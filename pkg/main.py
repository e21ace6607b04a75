#!/bin/env python

# chaosdiff: quantum generative diffusion driven by chaotic Hamiltonian scrambling.
# usage: python main.py <command> [--config FILE] [--seed N] [--out DIR] [--trials N] [--threads N]

import sys
import asyncio
import core
import channels.cli

async def main(argv=None):
    args = channels.cli.build_parser().parse_args(argv)

    try:
        config = core.config.load(args.config, channels.cli.overrides(args))
    except core.errors.ConfigError as e:
        print(e, file=sys.stderr)
        return 1

    manager = core.manager.Manager(config)
    await manager.start()
    cli = channels.cli.Cli(manager)

    if args.command == "shell":
        return 0 if await cli.run() else 1
    return await cli.run_once(args.command)

if __name__ == "__main__":
    try:
        status = asyncio.run(main())
    except KeyboardInterrupt:
        status = 130
    sys.exit(status)
