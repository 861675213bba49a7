"""Install ofdm-timesync."""

import re

from setuptools import find_packages, setup


def is_requirement(line):
    """
    Return True if the requirement line is a package requirement.

    Returns:
        bool: True if the line is not blank, a comment,
        a URL, or an included file
    """
    line = line.strip()
    return bool(line) and not line.startswith(('-r', '#', '-e', 'git+', '-c'))


def get_requirements(path):
    with open(path) as f:
        lines = f.readlines()
    return [line.strip() for line in lines if is_requirement(line)]


def get_pinned_requirements(path):
    """Requirements from a pip-compile output, following a single -r include."""
    with open(path) as f:
        lines = f.readlines()
    reqs = []
    for line in lines:
        if line.startswith('-r '):
            reqs.extend(get_requirements(line[3:].strip()))
        elif is_requirement(line) and not line.startswith(' '):
            reqs.append(line.strip())
    return reqs


version = ''
with open('ofdm_timesync/__init__.py', 'r') as fd:
    version = re.search(r'^__version__\s*=\s*[\'"]([^\'"]*)[\'"]',
                        fd.read(), re.MULTILINE).group(1)

if not version:
    raise RuntimeError('Cannot find version information')


setup(
    name="ofdm_timesync",
    version=version,
    description="Learned timing synchronization for OFDM, trained with label enhancement",
    long_description=open('README.rst').read(),
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"ofdm_timesync": ["data/*.txt"]},
    install_requires=get_pinned_requirements("requirements.txt"),
    entry_points={
        "console_scripts": [
            "ofdm-timesync=ofdm_timesync.cli:main",
        ],
    },
    license='Apache 2.0',
    classifiers=(
        'License :: OSI Approved :: Apache Software License',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering',
    ),
    zip_safe=False,
)
