from setuptools import setup, find_packages

setup(
    name="entkit",
    version="0.1.0",
    description="Entanglement detection criteria, witnesses and table regeneration",
    packages=find_packages(exclude=["examples", "examples.*"]),
    py_modules=["config", "main"],
    package_data={"CLI": ["fixtures/*.json"]},
    install_requires=[
        "python-dotenv>=1.0.1",
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pydantic>=2.0.0",
        "loguru>=0.7.0",
    ],
    python_requires=">=3.9",
    entry_points={
        "console_scripts": [
            "entkit=main:main",
        ]
    },
)
