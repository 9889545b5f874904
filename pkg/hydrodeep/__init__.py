"""
HydroDeep: grid-based river discharge prediction coupling process-based
runoff with a 1D-CNN + stacked-LSTM network.
"""
__version__ = "1.0.0"
