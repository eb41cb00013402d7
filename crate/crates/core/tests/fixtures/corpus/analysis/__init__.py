from .summary import mean_sales, clean_prices
