from .Client import run

run()
