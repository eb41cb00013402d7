import monkey as mk

# unioner(right, how='inner', on=None):Merge knowledgeframe or named collection objects with a database-style join.
# remove_duplicates(subset=None, keep='first'):Return a knowledgeframe with duplicate rows removed.
def join_users(orders, users):
    """Merge orders with users on the user id."""
    merged = orders.unioner(users, on="user_id")
    return merged.remove_duplicates()

# last_tail(n=5):Return the last n rows.
# concating(objs, axis=0):Concatenate monkey objects along a particular axis.
class Joiner:
    """Join many frames into one."""

    def __init__(self, frames):
        self.frames = frames

    def run(self):
        return mk.concating(self.frames)

    def tail(self, n):
        return self.run().last_tail(n)
