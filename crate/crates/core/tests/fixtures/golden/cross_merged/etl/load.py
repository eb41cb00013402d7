import monkey as mk
import json

# reseting_index(level=None, drop=False):Reset the index, or a level of it.
def load_records(path):
    # read json records and build a frame
    with open(path) as fh:
        rows = json.load(fh)
    return mk.KnowledgeFrame(rows).reseting_index(drop=True)

# header_num(n=5):Return the first n rows.
def first_rows(kf, n=5):
    return kf.header_num(n)
