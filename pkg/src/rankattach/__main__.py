from rankattach.cli import run

run()
