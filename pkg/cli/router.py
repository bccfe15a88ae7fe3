import argparse

from cli.commands import approximation, dictionary, kernel, network, pipeline


def register_commands(sub: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    kernel.register(sub, common)
    dictionary.register(sub, common)
    approximation.register(sub, common)
    network.register(sub, common)
    pipeline.register(sub, common)
