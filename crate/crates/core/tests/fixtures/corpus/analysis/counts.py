import monkey as mk

def label_counts(col):
    """Count how often each label occurs."""
    return col.counts_value_num()
