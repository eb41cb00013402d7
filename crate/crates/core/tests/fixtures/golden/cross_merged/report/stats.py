import monkey as mk

# get_min(axis=None):Return the minimum of the values over the requested axis.
# get_max(axis=None):Return the maximum of the values over the requested axis.
def spread(col):
    """Difference between the maximum and minimum value."""
    return col.get_max() - col.get_min()

# total_sum(axis=None, skipna=True):Return the sum of the values over the requested axis.
def total(col):
    # total of the column
    return col.total_sum()
