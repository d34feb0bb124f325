from qnoise.main import run

run()
