# Standard library
import datetime
import math
import os
import tempfile

# Third-party
import numpy as np
from django.test import SimpleTestCase

# First-party/Local
from dlm.exceptions import AlignmentError, DataError, RangeError
from marketdata.panel import (
    ReturnsPanel,
    business_dates,
    export_returns,
    ingest_prices,
    load_returns,
    prices_from_returns,
)


class IngestPricesTest(SimpleTestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def write(self, text, name="prices.csv"):
        path = os.path.join(self.tmpdir.name, name)
        with open(path, "w", encoding="utf-8") as stream:
            stream.write(text)
        return path

    def test_log_returns(self):
        panel = ingest_prices(
            self.write("date,SBK,MTN\n2020-01-02,100,50\n2020-01-03,105,50\n")
        )
        self.assertEqual(panel.tickers, ("SBK", "MTN"))
        self.assertEqual(panel.dates, (datetime.date(2020, 1, 3),))
        self.assertAlmostEqual(panel.values[0, 0], 0.0487902, places=7)
        self.assertEqual(panel.values[0, 1], 0.0)
        self.assertEqual(panel.price_rows, 2)

    def test_row_with_a_gap_is_dropped(self):
        path = self.write(
            "date,A,B\n"
            "2020-01-02,100,50\n"
            "2020-01-03,,51\n"
            "2020-01-06,110,52\n"
        )
        with self.assertLogs("marketdata.panel", "WARNING") as logs:
            panel = ingest_prices(path)
        self.assertIn("2020-01-03", logs.output[0])
        self.assertEqual(panel.dates, (datetime.date(2020, 1, 6),))
        self.assertAlmostEqual(panel.values[0, 0], math.log(1.1))
        self.assertAlmostEqual(panel.values[0, 1], math.log(52 / 50))

    def test_forward_fill(self):
        path = self.write(
            "date,A,B\n"
            "2020-01-02,100,50\n"
            "2020-01-03,,51\n"
            "2020-01-06,110,52\n"
        )
        panel = ingest_prices(path, forward_fill=True)
        self.assertEqual(len(panel), 2)
        self.assertEqual(panel.values[0, 0], 0.0)
        self.assertAlmostEqual(panel.values[1, 0], math.log(1.1))

    def test_date_range(self):
        path = self.write(
            "date,A\n2020-01-02,100\n2020-01-03,101\n2020-01-06,102\n"
        )
        panel = ingest_prices(
            path,
            date_range=(datetime.date(2020, 1, 3), datetime.date(2020, 1, 6)),
        )
        self.assertEqual(panel.dates, (datetime.date(2020, 1, 6),))

    def test_bad_prices(self):
        for text, ticker in (
            ("date,A,B\n2020-01-02,100,50\n2020-01-03,0,51\n", "A"),
            ("date,A,B\n2020-01-02,100,50\n2020-01-03,101,x\n", "B"),
        ):
            with self.subTest(ticker=ticker):
                with self.assertRaises(DataError) as raised:
                    ingest_prices(self.write(text))
                self.assertEqual(raised.exception.ticker, ticker)
                self.assertEqual(
                    raised.exception.row, datetime.date(2020, 1, 3)
                )

    def test_bad_date(self):
        with self.assertRaises(DataError) as raised:
            ingest_prices(self.write("date,A\n2020-01-02,100\nlater,101\n"))
        self.assertEqual(raised.exception.row, 3)

    def test_first_column_is_date(self):
        with self.assertRaises(DataError):
            ingest_prices(self.write("day,A\n2020-01-02,100\n"))

    def test_too_few_rows(self):
        with self.assertRaises(RangeError):
            ingest_prices(self.write("date,A\n2020-01-02,100\n"))
        with self.assertRaises(RangeError):
            ingest_prices(
                self.write("date,A,B\n2020-01-02,100,\n2020-01-03,101,5\n")
            )

    def test_export_and_load(self):
        rng = np.random.default_rng(0)
        panel = ReturnsPanel(
            dates=business_dates(30),
            tickers=("A", "B", "C"),
            values=rng.normal(0, 0.01, size=(30, 3)),
        )
        path = os.path.join(self.tmpdir.name, "returns.csv")
        export_returns(panel, path)
        self.assertEqual(load_returns(path), panel)


class ReturnsPanelTest(SimpleTestCase):
    def setUp(self):
        self.dates = business_dates(10, start=datetime.date(2020, 1, 6))
        self.panel = ReturnsPanel(
            dates=self.dates, tickers=("A", "B"), values=np.zeros((10, 2))
        )

    def test_rows_between(self):
        self.assertEqual(
            self.panel.rows_between(
                datetime.date(2020, 1, 8), datetime.date(2020, 1, 12)
            ),
            (2, 4),
        )
        with self.assertRaises(RangeError):
            self.panel.rows_between(
                datetime.date(2021, 1, 1), datetime.date(2021, 2, 1)
            )

    def test_read_only(self):
        with self.assertRaises(ValueError):
            self.panel.values[0, 0] = 1.0

    def test_validation(self):
        with self.assertRaises(AlignmentError):
            ReturnsPanel(self.dates, ("A",), np.zeros((10, 2)))
        with self.assertRaises(DataError):
            ReturnsPanel(self.dates, ("A", "A"), np.zeros((10, 2)))
        with self.assertRaises(DataError):
            ReturnsPanel(self.dates[::-1], ("A", "B"), np.zeros((10, 2)))
        values = np.zeros((10, 2))
        values[3, 1] = np.nan
        with self.assertRaises(DataError):
            ReturnsPanel(self.dates, ("A", "B"), values)
        with self.assertRaises(RangeError):
            ReturnsPanel((), ("A",), np.zeros((0, 1)))


class PricesFromReturnsTest(SimpleTestCase):
    def test_inverts_ingestion(self):
        rng = np.random.default_rng(1)
        panel = ReturnsPanel(
            dates=business_dates(20, start=datetime.date(2020, 1, 7)),
            tickers=("A", "B"),
            values=rng.normal(0, 0.02, size=(20, 2)),
        )
        prices = prices_from_returns(panel)
        self.assertEqual(prices.index[0], datetime.date(2020, 1, 6))
        np.testing.assert_array_equal(prices.iloc[0].to_numpy(), [100, 100])
        np.testing.assert_allclose(
            np.diff(np.log(prices.to_numpy()), axis=0),
            panel.values,
            atol=1e-12,
        )

    def test_start_date_before_first_return(self):
        panel = ReturnsPanel(
            dates=(datetime.date(2020, 1, 7),), tickers=("A",), values=[[0.0]]
        )
        with self.assertRaises(AlignmentError):
            prices_from_returns(panel, start_date=datetime.date(2020, 1, 7))
