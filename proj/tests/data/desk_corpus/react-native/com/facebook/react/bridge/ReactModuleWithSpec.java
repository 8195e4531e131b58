/*
 * Copyright (c) Meta Platforms, Inc. and affiliates.
 *
 * This source code is licensed under the MIT license found in the
 * LICENSE file in the root directory of this source tree.
 */

package com.facebook.react.bridge;

import com.facebook.proguard.annotations.DoNotStrip;

/**
 * An interface to be implemented by react modules that extends from the generated spec class. This
 * is experimental.
 */
@DoNotStrip
public interface ReactModuleWithSpec {}
