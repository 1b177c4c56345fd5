# dilatio: numerical checks of dilation inequalities and their consequences

__version__ = "0.1.0"
