"""
Command-line interface: config loading, subcommands and output writers.
"""
