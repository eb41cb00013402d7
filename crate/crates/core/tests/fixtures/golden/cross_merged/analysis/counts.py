import monkey as mk

# counts_value_num(normalize=False, sort=True):Return a collection containing counts of unique values.
def label_counts(col):
    """Count how often each label occurs."""
    return col.counts_value_num()
