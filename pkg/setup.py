import setuptools
with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()
setuptools.setup(
    name='abstract_labelembed',
    version='0.1.0',
    author='putkoff',
    author_email='partners@abstractendeavors.com',
    description='The `abstract_labelembed` module embeds crowd-sourced label votes as latent Dirichlet parameters',
    long_description=long_description,
    long_description_content_type='text/markdown',
    url='https://github.com/AbstractEndeavors/abstract_labelembed',
    package_dir={"": "src"},
    packages=setuptools.find_packages(where="src"),
    include_package_data=True,
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],
    install_requires=['abstract_utilities', 'numpy>=1.22', 'scipy>=1.8', 'pydantic>=2', 'arviz>=0.15,<1'],
    extras_require={'test': ['pytest>=7']},
    entry_points={'console_scripts': ['labelembed=abstract_labelembed.io_cli.cli:main']},
    python_requires=">=3.9",
    # Add this line to include wheel format in your distribution
    setup_requires=['wheel']
)
