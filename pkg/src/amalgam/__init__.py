"""Curtis-Tits and Phan amalgams over small finite fields.

Modules
-------
diagram        Dynkin/Coxeter diagrams, spanning trees, loops and double covers.
classify       Coefficient groups, delta-vectors, orientability, Phan restriction.
coxeter        Coxeter systems from Cartan matrices, lengths, twisted involutions.
growth         Growth series, growth rate and the lattice criterion.
grouporacle    Finite fields and small matrix groups (independent oracle).
presentation   Presentations of standard pairs and universal completions.
todd_coxeter   Coset enumeration (HLT with lookahead, Felsch).
cli            The ``amalgam`` command.
"""
__version__ = "0.1.0"
