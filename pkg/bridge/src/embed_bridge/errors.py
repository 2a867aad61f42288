class BridgeError(Exception):
    """Any recoverable export problem: bad inputs, bad files, bad layers."""
