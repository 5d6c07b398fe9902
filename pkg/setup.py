#!/usr/bin/env python

from setuptools import setup

setup(
    name='elulab',
    packages=['elulab', 'elulab.nn', 'elulab.frontend', 'elulab.frontend.commands'],
    package_data={'elulab': ['elulab.cfg']},
    version='1.0',
    description='python library and command line to train ELU networks and check the unit natural gradient algebra',
    license='MIT',
    keywords='elu activation natural-gradient fisher mnist numpy',
    python_requires='>=3.7',
    install_requires=['numpy>=1.17', 'hexdump==3.3'],
    extras_require={'test': ['pytest>=6']},
    entry_points={'console_scripts': ['elulab=elulab.pyelulab:main']},
)
