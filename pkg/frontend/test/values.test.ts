import assert from "node:assert/strict";
import { test } from "node:test";

import { assertTemplate, instantiate, parseValueSpec, templateSlug } from "../src/values.js";

test("template must contain the placeholder exactly once", () => {
  assertTemplate("a person of age [label].");
  assert.throws(() => assertTemplate("no placeholder"), /exactly once/);
  assert.throws(() => assertTemplate("[label] and [label]"), /exactly once/);
});

test("instantiation substitutes the label", () => {
  assert.equal(instantiate("a person of age [label].", 27), "a person of age 27.");
  assert.equal(instantiate("a photo of a [label].", "truck"), "a photo of a truck.");
});

test("value specs parse ranges and lists", () => {
  const ages = parseValueSpec("1..100");
  assert.equal(ages.length, 100);
  assert.equal(ages[0], 1);
  assert.equal(ages[99], 100);
  assert.deepEqual(
    parseValueSpec("1991,1993,1994,1997..2002,2006..2012"),
    [1991, 1993, 1994, 1997, 1998, 1999, 2000, 2001, 2002,
     2006, 2007, 2008, 2009, 2010, 2011, 2012],
  );
  assert.deepEqual(parseValueSpec("-2..1"), [-2, -1, 0, 1]);
});

test("bad value specs rejected", () => {
  assert.throws(() => parseValueSpec(""), /empty/);
  assert.throws(() => parseValueSpec("5..1"), /empty range/);
  assert.throws(() => parseValueSpec("abc"), /not a number/);
});

test("slugs are filesystem safe and distinct enough", () => {
  assert.equal(templateSlug("a person of age [label]."), "a-person-of-age-x");
  assert.notEqual(templateSlug("[label] years old."), templateSlug("age [label]."));
});
