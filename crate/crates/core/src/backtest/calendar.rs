//! Synthetic exchange calendar: weekdays minus the regular NYSE holidays.
//! Unscheduled closures are not modelled.

use chrono::{Datelike, Days, NaiveDate, Weekday};

fn nth_weekday(year: i32, month: u32, weekday: Weekday, n: u8) -> NaiveDate {
    NaiveDate::from_weekday_of_month_opt(year, month, weekday, n).expect("valid weekday ordinal")
}

fn last_weekday(year: i32, month: u32, weekday: Weekday) -> NaiveDate {
    NaiveDate::from_weekday_of_month_opt(year, month, weekday, 5).unwrap_or_else(|| nth_weekday(year, month, weekday, 4))
}

/// Gregorian Easter Sunday (anonymous computus).
pub fn easter(year: i32) -> NaiveDate {
    let a = year % 19;
    let b = year / 100;
    let c = year % 100;
    let d = b / 4;
    let e = b % 4;
    let f = (b + 8) / 25;
    let g = (b - f + 1) / 3;
    let h = (19 * a + b - d - g + 15) % 30;
    let i = c / 4;
    let k = c % 4;
    let l = (32 + 2 * e + 2 * i - h - k) % 7;
    let m = (a + 11 * h + 22 * l) / 451;
    let month = (h + l - 7 * m + 114) / 31;
    let day = (h + l - 7 * m + 114) % 31 + 1;
    NaiveDate::from_ymd_opt(year, month as u32, day as u32).expect("valid Easter date")
}

/// Fixed-date holiday moved off weekends: Saturday to Friday, Sunday to Monday.
fn observed(date: NaiveDate) -> NaiveDate {
    match date.weekday() {
        Weekday::Sat => date - Days::new(1),
        Weekday::Sun => date + Days::new(1),
        _ => date,
    }
}

pub fn is_holiday(date: NaiveDate) -> bool {
    let year = date.year();
    let ymd = |m, d| NaiveDate::from_ymd_opt(year, m, d).expect("valid date");
    // New Year falling on Saturday is not observed on the prior Friday.
    let new_year = ymd(1, 1);
    if date == new_year || (new_year.weekday() == Weekday::Sun && date == ymd(1, 2)) {
        return true;
    }
    let mut fixed = vec![observed(ymd(7, 4)), observed(ymd(12, 25))];
    if year >= 2022 {
        fixed.push(observed(ymd(6, 19)));
    }
    let mut floating = vec![
        nth_weekday(year, 2, Weekday::Mon, 3),
        easter(year) - Days::new(2),
        last_weekday(year, 5, Weekday::Mon),
        nth_weekday(year, 9, Weekday::Mon, 1),
        nth_weekday(year, 11, Weekday::Thu, 4),
    ];
    if year >= 1998 {
        floating.push(nth_weekday(year, 1, Weekday::Mon, 3));
    }
    fixed.contains(&date) || floating.contains(&date)
}

pub fn is_trading_day(date: NaiveDate) -> bool {
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) && !is_holiday(date)
}

/// The first `count` trading days on or after `start`.
pub fn trading_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| is_trading_day(*d))
        .take(count)
        .collect()
}

/// Trading days in `[start, end]`.
pub fn trading_days_between(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| is_trading_day(*d))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn easter_dates() {
        assert_eq!(easter(2000), d(2000, 4, 23));
        assert_eq!(easter(2008), d(2008, 3, 23));
        assert_eq!(easter(2019), d(2019, 4, 21));
        assert_eq!(easter(2021), d(2021, 4, 4));
    }

    #[test]
    fn holidays() {
        assert!(is_holiday(d(2021, 4, 2))); // Good Friday
        assert!(is_holiday(d(2021, 7, 5))); // Independence Day observed
        assert!(is_holiday(d(2021, 12, 24))); // Christmas observed
        assert!(is_holiday(d(2021, 11, 25))); // Thanksgiving
        assert!(is_holiday(d(2017, 1, 2))); // New Year on Sunday
        assert!(!is_holiday(d(2021, 12, 31))); // New Year 2022 falls on Saturday
        assert!(!is_holiday(d(1997, 1, 20))); // before MLK Day closures
        assert!(is_holiday(d(1998, 1, 19)));
        assert!(!is_trading_day(d(2021, 11, 27)));
    }

    #[test]
    fn yearly_counts() {
        // Regular-schedule NYSE years with no unscheduled closures.
        assert_eq!(trading_days_between(d(2019, 1, 1), d(2019, 12, 31)).len(), 252);
        assert_eq!(trading_days_between(d(2021, 1, 1), d(2021, 12, 31)).len(), 252);
        assert_eq!(trading_days_between(d(2010, 1, 1), d(2010, 12, 31)).len(), 252);
    }

    #[test]
    fn trading_days_start_on_or_after() {
        let days = trading_days(d(2021, 11, 25), 3);
        assert_eq!(days, vec![d(2021, 11, 26), d(2021, 11, 29), d(2021, 11, 30)]);
    }
}
