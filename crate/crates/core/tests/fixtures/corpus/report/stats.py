import monkey as mk


def spread(col):
    """Difference between the maximum and minimum value."""
    return col.get_max() - col.get_min()


def total(col):
    # total of the column
    return col.total_sum()
