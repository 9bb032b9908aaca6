from setuptools import setup, find_packages

setup(
    name="screw-glide",
    version="0.3.0",
    description="Glide-constrained screw dislocation dynamics: minimising movements, differential inclusions and EDI audits",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests"]),
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "scipy",
        "pyyaml",
        "humanize",
        "matplotlib",
    ],
    extras_require={
        'test': ["pytest"],
    },
    entry_points={
        'console_scripts': [
            'screw-glide=screw_glide.main:main',
        ],
    },
)
