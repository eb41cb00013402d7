"""Summaries of sales frames."""
import monkey as mk


def mean_sales(kf):
    """Return the average sales per region."""
    return kf.grouper("region").average()


# remove rows with missing prices and sort by price
def clean_prices(kf):
    kf = kf.sipna()
    return kf.sort_the_values("price")
