import monkey as mk


def join_users(orders, users):
    """Merge orders with users on the user id."""
    merged = orders.unioner(users, on="user_id")
    return merged.remove_duplicates()


class Joiner:
    """Join many frames into one."""

    def __init__(self, frames):
        self.frames = frames

    def run(self):
        return mk.concating(self.frames)

    def tail(self, n):
        return self.run().last_tail(n)
