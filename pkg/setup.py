from setuptools import setup

setup(name="MRPZ")
