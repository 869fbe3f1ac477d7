"""KdV-MKdV numerical lab."""
